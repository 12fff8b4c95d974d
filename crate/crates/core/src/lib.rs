//! Core of the LDL toolchain: syntax, typing, logics and evaluation.

pub mod ast;
pub mod classical;
pub mod eval;
pub mod fmt;
pub mod graph;
pub mod lexer;
pub mod logic;
pub mod negation;
pub mod net;
pub mod parser;
pub mod pretty;
pub mod real;
pub mod sampling;
pub mod tape;
pub mod testgen;
pub mod typeck;
