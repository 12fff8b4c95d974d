//! Pretty printing back to concrete syntax, plus an s-expression dump of the
//! resolved tree used for golden files.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::ast::{fresh_name, BoolLit, BuiltinOp, Expr, ExprKind, Quantifier};
use crate::lexer::is_keyword;
use crate::parser::SpecFile;

const BINDER: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const LOOKUP: u8 = 8;
const APP: u8 = 9;
const ATOM: u8 = 10;

/// Renders an expression in concrete syntax that parses back to an
/// alpha-equivalent tree.
pub fn pretty(e: &Expr) -> String {
    let mut avoid: BTreeSet<String> = e.free_vars();
    avoid.extend(e.networks());
    Printer {
        avoid,
        stack: Vec::new(),
    }
    .go(e, BINDER)
}

/// Renders a whole specification file.
pub fn pretty_spec(spec: &SpecFile) -> String {
    let mut out = String::new();
    for n in &spec.networks {
        let _ = writeln!(out, "network {} : Vec {} -> Vec {}", n.name, n.input, n.output);
    }
    if !spec.networks.is_empty() {
        out.push('\n');
    }
    for d in &spec.definitions {
        let mut avoid = d.expr.free_vars();
        avoid.extend(spec.networks.iter().map(|n| n.name.clone()));
        avoid.extend(spec.definitions.iter().map(|d| d.name.clone()));
        let body = Printer {
            avoid,
            stack: Vec::new(),
        }
        .go(&d.expr, BINDER);
        let _ = writeln!(out, "let {} : {} =\n  {}\n", d.name, d.ty, body);
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

pub fn format_real(v: f64) -> String {
    format!("{v:?}")
}

struct Printer {
    avoid: BTreeSet<String>,
    stack: Vec<String>,
}

fn sanitize(hint: &str) -> String {
    let s: String = hint
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '\'' { c } else { '_' })
        .collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => s,
        _ => format!("x{s}"),
    }
}

fn paren(s: String, needed: bool) -> String {
    if needed {
        format!("({s})")
    } else {
        s
    }
}

impl Printer {
    fn bind(&mut self, hint: &str) -> String {
        let name = fresh_name(&sanitize(hint), |n| {
            is_keyword(n) || self.avoid.contains(n) || self.stack.iter().any(|s| s == n)
        });
        self.stack.push(name.clone());
        name
    }

    fn go(&mut self, e: &Expr, prec: u8) -> String {
        if let Some((op, args)) = e.as_op_app() {
            return self.op_app(op, &args, prec);
        }
        match &e.kind {
            ExprKind::Bound { name, index } => self
                .stack
                .len()
                .checked_sub(index + 1)
                .map(|i| self.stack[i].clone())
                .unwrap_or_else(|| name.clone()),
            ExprKind::Free(n) | ExprKind::Network(n) => n.clone(),
            ExprKind::Real(v) => paren(format_real(*v), v.is_sign_negative() && prec > UNARY),
            ExprKind::Index(i) => i.to_string(),
            ExprKind::Bool(BoolLit::Top) => "True".into(),
            ExprKind::Bool(BoolLit::Bottom) => "False".into(),
            ExprKind::Op(op) => format!("({})", op.symbol()),
            ExprKind::Vec(es) => {
                let items: Vec<String> = es.iter().map(|x| self.go(x, BINDER)).collect();
                format!("[{}]", items.join(", "))
            }
            ExprKind::App(f, a) => {
                let s = format!("{} {}", self.go(f, APP), self.go(a, ATOM));
                paren(s, prec > APP)
            }
            ExprKind::Lam(b, body) => {
                let name = self.bind(&b.name);
                let body = self.go(body, BINDER);
                self.stack.pop();
                paren(format!("lam ({name} : {}) . {body}", b.ty), prec > BINDER)
            }
            ExprKind::Quant(q, b, body) => {
                let name = self.bind(&b.name);
                let body = self.go(body, BINDER);
                self.stack.pop();
                let kw = match q {
                    Quantifier::Forall => "forall",
                    Quantifier::Exists => "exists",
                };
                paren(format!("{kw} ({name} : {}) . {body}", b.ty), prec > BINDER)
            }
            ExprKind::Let(b, bound, body) => {
                let bound = self.go(bound, BINDER);
                let name = self.bind(&b.name);
                let body = self.go(body, BINDER);
                self.stack.pop();
                paren(
                    format!("let ({name} : {}) = {bound} in {body}", b.ty),
                    prec > BINDER,
                )
            }
        }
    }

    fn op_app(&mut self, op: BuiltinOp, args: &[&Expr], prec: u8) -> String {
        use BuiltinOp::*;
        let infix = |p: &mut Self, level: u8, l: u8, r: u8, sym: &str| {
            let s = format!("{} {sym} {}", p.go(args[0], l), p.go(args[1], r));
            paren(s, prec > level)
        };
        match op {
            Implies => infix(self, IMPLIES, OR, IMPLIES, "=>"),
            Or => infix(self, OR, OR, AND, "or"),
            And => infix(self, AND, AND, CMP, "and"),
            Eq | Neq | Leq | Geq | Lt | Gt => infix(self, CMP, ADD, ADD, op.symbol()),
            Add => {
                if let Some((Neg, inner)) = args[1].as_op_app() {
                    let s = format!("{} - {}", self.go(args[0], ADD), self.go(inner[0], MUL));
                    paren(s, prec > ADD)
                } else {
                    infix(self, ADD, ADD, MUL, "+")
                }
            }
            Mul => infix(self, MUL, MUL, UNARY, "*"),
            Lookup => infix(self, LOOKUP, LOOKUP, APP, "!"),
            Neg => {
                let s = self.go(args[0], UNARY);
                let wrap = s.starts_with('-') || s.starts_with(|c: char| c.is_ascii_digit());
                paren(format!("-{}", paren(s, wrap)), prec > UNARY)
            }
            Not => {
                let s = self.go(args[0], UNARY);
                paren(format!("not {s}"), prec > UNARY)
            }
        }
    }
}

/// S-expression dump of the resolved tree, showing de Bruijn indices.
pub fn ast_dump(e: &Expr) -> String {
    let mut out = String::new();
    dump(e, &mut out);
    out
}

fn dump(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Bound { name, index } => {
            let _ = write!(out, "(bound {name} {index})");
        }
        ExprKind::Free(n) => {
            let _ = write!(out, "(free {n})");
        }
        ExprKind::Network(n) => {
            let _ = write!(out, "(network {n})");
        }
        ExprKind::Real(v) => {
            let _ = write!(out, "(real {})", format_real(*v));
        }
        ExprKind::Index(i) => {
            let _ = write!(out, "(index {i})");
        }
        ExprKind::Bool(BoolLit::Top) => out.push_str("(bool top)"),
        ExprKind::Bool(BoolLit::Bottom) => out.push_str("(bool bottom)"),
        ExprKind::Op(op) => {
            let _ = write!(out, "(op {})", op_name(*op));
        }
        ExprKind::App(f, a) => {
            out.push_str("(app ");
            dump(f, out);
            out.push(' ');
            dump(a, out);
            out.push(')');
        }
        ExprKind::Lam(b, body) => {
            let _ = write!(out, "(lam {} \"{}\" ", b.name, b.ty);
            dump(body, out);
            out.push(')');
        }
        ExprKind::Let(b, bound, body) => {
            let _ = write!(out, "(let {} \"{}\" ", b.name, b.ty);
            dump(bound, out);
            out.push(' ');
            dump(body, out);
            out.push(')');
        }
        ExprKind::Quant(q, b, body) => {
            let _ = write!(out, "({} {} \"{}\" ", q.keyword(), b.name, b.ty);
            dump(body, out);
            out.push(')');
        }
        ExprKind::Vec(es) => {
            out.push_str("(vec");
            for x in es {
                out.push(' ');
                dump(x, out);
            }
            out.push(')');
        }
    }
}

pub fn op_name(op: BuiltinOp) -> &'static str {
    use BuiltinOp::*;
    match op {
        And => "and",
        Or => "or",
        Not => "not",
        Implies => "implies",
        Add => "add",
        Neg => "neg",
        Mul => "mul",
        Eq => "eq",
        Neq => "neq",
        Leq => "leq",
        Geq => "geq",
        Lt => "lt",
        Gt => "gt",
        Lookup => "lookup",
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&pretty(self))
    }
}
