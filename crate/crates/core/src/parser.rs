//! Recursive-descent parser for `.ldl` specification files.
//!
//! Precedence, tightest first: application, `!`, unary `-`/`not`, `*`,
//! `+`/`-`, comparisons (non-associative), `and`, `or`, `=>` (right
//! associative). Binder forms (`lam`, `forall`, `exists`, `let ... in`)
//! extend as far right as possible and may appear in any operand position.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{BoolLit, BuiltinOp, Expr, ExprKind, LdlType, NetworkTypeCtx, Quantifier, Span};
use crate::lexer::{tokenize, Tok, Token};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: illegal character {ch:?}")]
    IllegalCharacter { ch: char, line: u32, col: u32 },
    #[error("{line}:{col}: {message}")]
    Syntax { message: String, line: u32, col: u32 },
    #[error("{line}:{col}: undeclared network or variable `{name}`")]
    Undeclared { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: duplicate definition `{name}`")]
    Duplicate { name: String, line: u32, col: u32 },
}

impl ParseError {
    pub fn position(&self) -> (u32, u32) {
        match self {
            ParseError::IllegalCharacter { line, col, .. }
            | ParseError::Syntax { line, col, .. }
            | ParseError::Undeclared { line, col, .. }
            | ParseError::Duplicate { line, col, .. } => (*line, *col),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDecl {
    pub name: String,
    pub input: usize,
    pub output: usize,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub name: String,
    pub ty: LdlType,
    pub expr: Expr,
    pub span: Span,
}

/// A parsed specification. The last definition is the root property.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub networks: Vec<NetworkDecl>,
    pub definitions: Vec<Definition>,
}

impl SpecFile {
    pub fn network_ctx(&self) -> NetworkTypeCtx {
        self.networks
            .iter()
            .map(|n| (n.name.clone(), (n.input, n.output)))
            .collect()
    }

    pub fn root(&self) -> &Definition {
        self.definitions
            .last()
            .expect("a parsed spec has at least one definition")
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    /// The whole file as one closed expression: earlier definitions become
    /// `let` bindings around the root definition's body.
    pub fn root_expr(&self) -> Expr {
        let (last, rest) = self
            .definitions
            .split_last()
            .expect("a parsed spec has at least one definition");
        rest.iter().rev().fold(last.expr.clone(), |body, d| {
            Expr::let_in(&d.name, d.ty.clone(), d.expr.clone(), body)
        })
    }
}

/// Parses a complete specification file.
pub fn parse(source: &str) -> Result<SpecFile, ParseError> {
    let tokens = tokenize(source)?;
    let networks: BTreeSet<String> = tokens
        .windows(2)
        .filter_map(|w| match (&w[0].tok, &w[1].tok) {
            (Tok::Network, Tok::Ident(n)) => Some(n.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser::new(tokens, networks, BTreeSet::new());
    p.spec_file()
}

/// Parses a standalone expression. Identifiers that are not bound inside the
/// expression resolve to `free` names first, then to networks.
pub fn parse_expr(source: &str, networks: &NetworkTypeCtx, free: &[&str]) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(
        tokens,
        networks.keys().cloned().collect(),
        free.iter().map(|s| s.to_string()).collect(),
    );
    let e = p.expr()?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

pub fn parse_type(source: &str) -> Result<LdlType, ParseError> {
    let mut p = Parser::new(tokenize(source)?, BTreeSet::new(), BTreeSet::new());
    let t = p.ty()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    networks: BTreeSet<String>,
    defs: BTreeSet<String>,
    scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(tokens: Vec<Token>, networks: BTreeSet<String>, defs: BTreeSet<String>) -> Self {
        Parser {
            tokens,
            pos: 0,
            networks,
            defs,
            scope: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = self.span();
        Err(ParseError::Syntax {
            message: message.into(),
            line: s.line,
            col: s.col,
        })
    }

    fn expect(&mut self, t: &Tok) -> PResult<Token> {
        if self.peek() == t {
            Ok(self.bump())
        } else {
            self.error(format!("expected {}, found {}", t.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let s = self.bump().span;
                Ok((name, s))
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn nat(&mut self) -> PResult<usize> {
        match *self.peek() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            ref other => self.error(format!("expected natural number, found {}", other.describe())),
        }
    }

    /// Span from `start` to the end of the last consumed token.
    fn span_from(&self, start: Span) -> Span {
        let end = if self.pos == 0 {
            start.end
        } else {
            self.tokens[self.pos - 1].span.end.max(start.start)
        };
        Span { end, ..start }
    }

    fn spec_file(&mut self) -> PResult<SpecFile> {
        let mut networks: Vec<NetworkDecl> = Vec::new();
        let mut definitions: Vec<Definition> = Vec::new();
        loop {
            let start = self.span();
            match self.peek() {
                Tok::Eof => break,
                Tok::Network => {
                    self.bump();
                    let (name, nspan) = self.ident()?;
                    if networks.iter().any(|n| n.name == name) {
                        return Err(ParseError::Duplicate {
                            name,
                            line: nspan.line,
                            col: nspan.col,
                        });
                    }
                    self.expect(&Tok::Colon)?;
                    let tspan = self.span();
                    let ty = self.ty()?;
                    let (input, output) = match &ty {
                        LdlType::Fun(d, c) => match (d.as_ref(), c.as_ref()) {
                            (LdlType::Vec(m), LdlType::Vec(n)) => (*m, *n),
                            _ => (0, 0),
                        },
                        _ => (0, 0),
                    };
                    if input == 0 {
                        return Err(ParseError::Syntax {
                            message: format!("network `{name}` must have type Vec m -> Vec n, found {ty}"),
                            line: tspan.line,
                            col: tspan.col,
                        });
                    }
                    networks.push(NetworkDecl {
                        name,
                        input,
                        output,
                        span: self.span_from(start),
                    });
                }
                Tok::Let => {
                    self.bump();
                    let parens = self.eat(&Tok::LParen);
                    let (name, nspan) = self.ident()?;
                    if self.defs.contains(&name) || networks.iter().any(|n| n.name == name) {
                        return Err(ParseError::Duplicate {
                            name,
                            line: nspan.line,
                            col: nspan.col,
                        });
                    }
                    self.expect(&Tok::Colon)?;
                    let ty = self.ty()?;
                    if parens {
                        self.expect(&Tok::RParen)?;
                    }
                    self.expect(&Tok::Assign)?;
                    let expr = self.expr()?;
                    if !matches!(self.peek(), Tok::Let | Tok::Network | Tok::Eof) {
                        return self.error(format!(
                            "unexpected {} after definition of `{name}`",
                            self.peek().describe()
                        ));
                    }
                    self.defs.insert(name.clone());
                    definitions.push(Definition {
                        name,
                        ty,
                        expr,
                        span: self.span_from(start),
                    });
                }
                other => {
                    return self.error(format!(
                        "expected `network` or `let` at top level, found {}",
                        other.describe()
                    ))
                }
            }
        }
        if definitions.is_empty() {
            return self.error("empty specification: no root definition");
        }
        Ok(SpecFile {
            networks,
            definitions,
        })
    }

    fn ty(&mut self) -> PResult<LdlType> {
        let start = self.span();
        let dom = self.simple_ty()?;
        if self.eat(&Tok::Arrow) {
            if dom.is_function() {
                return Err(ParseError::Syntax {
                    message: format!("function type `{dom}` cannot be a function domain"),
                    line: start.line,
                    col: start.col,
                });
            }
            let cod = self.ty()?;
            Ok(LdlType::fun(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn simple_ty(&mut self) -> PResult<LdlType> {
        match self.peek() {
            Tok::TyReal => {
                self.bump();
                Ok(LdlType::Real)
            }
            Tok::TyBool => {
                self.bump();
                Ok(LdlType::Bool)
            }
            Tok::TyVec | Tok::TyIndex => {
                let is_vec = self.bump().tok == Tok::TyVec;
                let n = self.nat()?;
                if n == 0 {
                    return self.error("type size must be at least 1");
                }
                Ok(if is_vec { LdlType::Vec(n) } else { LdlType::Index(n) })
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            other => self.error(format!("expected a type, found {}", other.describe())),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.operand(Self::implies)
    }

    /// Parses a binder form if one starts here, otherwise defers to `level`.
    fn operand(&mut self, level: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        match self.peek() {
            Tok::Lam | Tok::Forall | Tok::Exists | Tok::Let => self.binder_expr(),
            _ => level(self),
        }
    }

    fn binder_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.bump().tok {
            Tok::Let => {
                let parens = self.eat(&Tok::LParen);
                let (name, _) = self.ident()?;
                self.expect(&Tok::Colon)?;
                let ty = self.ty()?;
                if parens {
                    self.expect(&Tok::RParen)?;
                }
                self.expect(&Tok::Assign)?;
                let bound = self.expr()?;
                self.expect(&Tok::In)?;
                self.scope.push(name.clone());
                let body = self.expr();
                self.scope.pop();
                let body = body?;
                Ok(Expr::from(ExprKind::Let(
                    crate::ast::Binder::new(name, ty),
                    Box::new(bound),
                    Box::new(body),
                ))
                .with_span(self.span_from(start)))
            }
            tok => {
                let mut binders = Vec::new();
                loop {
                    self.expect(&Tok::LParen)?;
                    let (name, _) = self.ident()?;
                    self.expect(&Tok::Colon)?;
                    let ty = self.ty()?;
                    self.expect(&Tok::RParen)?;
                    binders.push(crate::ast::Binder::new(name, ty));
                    if *self.peek() != Tok::LParen {
                        break;
                    }
                }
                self.expect(&Tok::Dot)?;
                for b in &binders {
                    self.scope.push(b.name.clone());
                }
                let body = self.expr();
                self.scope.truncate(self.scope.len() - binders.len());
                let mut e = body?;
                for b in binders.into_iter().rev() {
                    let kind = match tok {
                        Tok::Lam => ExprKind::Lam(b, Box::new(e)),
                        Tok::Forall => ExprKind::Quant(Quantifier::Forall, b, Box::new(e)),
                        _ => ExprKind::Quant(Quantifier::Exists, b, Box::new(e)),
                    };
                    e = Expr::from(kind).with_span(self.span_from(start));
                }
                Ok(e)
            }
        }
    }

    fn binop(&self, op: BuiltinOp, a: Expr, b: Expr, start: Span) -> Expr {
        Expr::binop(op, a, b).with_span(self.span_from(start))
    }

    fn implies(&mut self) -> PResult<Expr> {
        let start = self.span();
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.operand(Self::implies)?;
            return Ok(self.binop(BuiltinOp::Implies, lhs, rhs, start));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.operand(Self::and)?;
            lhs = self.binop(BuiltinOp::Or, lhs, rhs, start);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.comparison()?;
        while self.eat(&Tok::And) {
            let rhs = self.operand(Self::comparison)?;
            lhs = self.binop(BuiltinOp::And, lhs, rhs, start);
        }
        Ok(lhs)
    }

    fn comparison_op(&self) -> Option<BuiltinOp> {
        Some(match self.peek() {
            Tok::EqEq => BuiltinOp::Eq,
            Tok::Neq => BuiltinOp::Neq,
            Tok::Leq => BuiltinOp::Leq,
            Tok::Geq => BuiltinOp::Geq,
            Tok::Lt => BuiltinOp::Lt,
            Tok::Gt => BuiltinOp::Gt,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let start = self.span();
        let lhs = self.additive()?;
        if let Some(op) = self.comparison_op() {
            self.bump();
            let rhs = self.operand(Self::additive)?;
            if self.comparison_op().is_some() {
                return self.error("comparisons are non-associative; add parentheses");
            }
            return Ok(self.binop(op, lhs, rhs, start));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.multiplicative()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.operand(Self::multiplicative)?;
                lhs = self.binop(BuiltinOp::Add, lhs, rhs, start);
            } else if *self.peek() == Tok::Minus {
                let mspan = self.bump().span;
                let rhs = self.operand(Self::multiplicative)?;
                let neg = Expr::unop(BuiltinOp::Neg, rhs).with_span(self.span_from(mspan));
                lhs = self.binop(BuiltinOp::Add, lhs, neg, start);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.operand(Self::unary)?;
            lhs = self.binop(BuiltinOp::Mul, lhs, rhs, start);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek() {
            Tok::Minus => {
                // `-` directly on a real literal is a negative constant, unless
                // the literal is itself the head of a tighter construct.
                if let Tok::RealLit(v) = *self.peek_at(1) {
                    let after = self.peek_at(2);
                    if *after != Tok::Bang && !starts_atom(after) {
                        self.bump();
                        self.bump();
                        return Ok(Expr::real(-v).with_span(self.span_from(start)));
                    }
                }
                self.bump();
                let arg = self.operand(Self::unary)?;
                Ok(Expr::unop(BuiltinOp::Neg, arg).with_span(self.span_from(start)))
            }
            Tok::Not => {
                self.bump();
                let arg = self.operand(Self::unary)?;
                Ok(Expr::unop(BuiltinOp::Not, arg).with_span(self.span_from(start)))
            }
            _ => self.lookup(),
        }
    }

    fn lookup(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = self.application()?;
        while self.eat(&Tok::Bang) {
            let rhs = self.application()?;
            lhs = self.binop(BuiltinOp::Lookup, lhs, rhs, start);
        }
        Ok(lhs)
    }

    fn application(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut head = self.atom()?;
        while starts_atom(self.peek()) {
            let arg = self.atom()?;
            head = Expr::app(head, arg).with_span(self.span_from(start));
        }
        Ok(head)
    }

    fn section(&self) -> Option<BuiltinOp> {
        if *self.peek() != Tok::LParen || *self.peek_at(2) != Tok::RParen {
            return None;
        }
        Some(match self.peek_at(1) {
            Tok::Plus => BuiltinOp::Add,
            Tok::Star => BuiltinOp::Mul,
            Tok::Minus => BuiltinOp::Neg,
            Tok::And => BuiltinOp::And,
            Tok::Or => BuiltinOp::Or,
            Tok::Not => BuiltinOp::Not,
            Tok::Implies => BuiltinOp::Implies,
            Tok::EqEq => BuiltinOp::Eq,
            Tok::Neq => BuiltinOp::Neq,
            Tok::Leq => BuiltinOp::Leq,
            Tok::Geq => BuiltinOp::Geq,
            Tok::Lt => BuiltinOp::Lt,
            Tok::Gt => BuiltinOp::Gt,
            Tok::Bang => BuiltinOp::Lookup,
            _ => return None,
        })
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        if let Some(op) = self.section() {
            for _ in 0..3 {
                self.bump();
            }
            return Ok(Expr::op(op).with_span(self.span_from(start)));
        }
        let e = match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                self.resolve(name, start)?
            }
            Tok::Nat(n) => {
                self.bump();
                Expr::index(n)
            }
            Tok::RealLit(v) => {
                self.bump();
                Expr::real(v)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(BoolLit::Top).into()
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(BoolLit::Bottom).into()
            }
            Tok::LBracket => {
                self.bump();
                let mut elems = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        elems.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBracket)?;
                Expr::vec(elems)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                return Ok(e);
            }
            other => return self.error(format!("expected an expression, found {}", other.describe())),
        };
        Ok(e.with_span(self.span_from(start)))
    }

    fn resolve(&self, name: String, at: Span) -> PResult<Expr> {
        if let Some(pos) = self.scope.iter().rposition(|n| *n == name) {
            let index = self.scope.len() - 1 - pos;
            return Ok(ExprKind::Bound { name, index }.into());
        }
        if self.defs.contains(&name) {
            return Ok(Expr::free(name));
        }
        if self.networks.contains(&name) {
            return Ok(Expr::network(name));
        }
        Err(ParseError::Undeclared {
            name,
            line: at.line,
            col: at.col,
        })
    }
}

fn starts_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_) | Tok::Nat(_) | Tok::RealLit(_) | Tok::True | Tok::False | Tok::LBracket | Tok::LParen
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use BuiltinOp::*;

    fn p(src: &str) -> Expr {
        parse_expr(src, &NetworkTypeCtx::new(), &["a", "b", "c", "d", "x", "v"]).unwrap()
    }

    fn f(n: &str) -> Expr {
        Expr::free(n)
    }

    #[test]
    fn arithmetic_precedence() {
        assert_eq!(
            p("a + b * c"),
            Expr::binop(Add, f("a"), Expr::binop(Mul, f("b"), f("c")))
        );
        assert_eq!(
            p("a - b"),
            Expr::binop(Add, f("a"), Expr::unop(Neg, f("b")))
        );
        assert_eq!(p("-x ! a"), Expr::unop(Neg, Expr::binop(Lookup, f("x"), f("a"))));
    }

    #[test]
    fn logical_precedence() {
        let le = |x: &str, y: &str| Expr::binop(Leq, f(x), f(y));
        assert_eq!(
            p("a <= b and c <= d or a <= c"),
            Expr::binop(Or, Expr::binop(And, le("a", "b"), le("c", "d")), le("a", "c"))
        );
        assert_eq!(
            p("a <= b => c <= d => a <= c"),
            Expr::binop(Implies, le("a", "b"), Expr::binop(Implies, le("c", "d"), le("a", "c")))
        );
    }

    #[test]
    fn negative_literals() {
        assert_eq!(p("-3.0"), Expr::real(-3.0));
        assert_eq!(p("-(3.0)"), Expr::unop(Neg, Expr::real(3.0)));
        assert_eq!(p("a - 3.0"), Expr::binop(Add, f("a"), Expr::unop(Neg, Expr::real(3.0))));
    }

    #[test]
    fn comparisons_do_not_chain() {
        assert!(parse_expr("a <= b <= c", &NetworkTypeCtx::new(), &["a", "b", "c"]).is_err());
    }

    #[test]
    fn binder_in_operand_position() {
        let e = p("a <= b and forall (i : Index 2) . a <= b");
        let (op, args) = e.as_op_app().unwrap();
        assert_eq!(op, And);
        assert!(matches!(args[1].kind, ExprKind::Quant(Quantifier::Forall, ..)));
    }

    #[test]
    fn bound_indices() {
        let e = p("lam (x : Real) . lam (y : Real) . x + y");
        let expected = Expr::lam(
            "x",
            LdlType::Real,
            Expr::lam("y", LdlType::Real, Expr::binop(Add, f("x"), f("y"))),
        );
        assert!(e.alpha_eq(&expected));
        // the outer free `x` is shadowed by the lambda
        assert!(e.free_vars().is_empty());
    }

    #[test]
    fn sections() {
        assert_eq!(p("(+) a b"), Expr::binop(Add, f("a"), f("b")));
        assert_eq!(p("(-) a"), Expr::unop(Neg, f("a")));
        assert_eq!(p("(!) x a"), Expr::binop(Lookup, f("x"), f("a")));
    }

    #[test]
    fn empty_source_is_error() {
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("-- only a comment\n"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn undeclared_network_named() {
        let err = parse("network f : Vec 2 -> Vec 2\nlet r : Vec 2 -> Bool = lam (x : Vec 2) . g x ! 0 <= 1.0").unwrap_err();
        match err {
            ParseError::Undeclared { name, .. } => assert_eq!(name, "g"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_text("let r : Bool = g").contains("`g`"));
    }

    fn err_text(src: &str) -> String {
        parse(src).unwrap_err().to_string()
    }

    #[test]
    fn duplicate_definition() {
        let err = parse("let a : Real = 1.0\nlet a : Real = 2.0").unwrap_err();
        assert!(matches!(err, ParseError::Duplicate { ref name, line: 2, .. } if name == "a"));
    }

    #[test]
    fn root_expr_nests_definitions() {
        let spec = parse("let a : Real = 1.0\nlet r : Bool = a <= 2.0").unwrap();
        assert_eq!(spec.root().name, "r");
        let root = spec.root_expr();
        assert!(matches!(root.kind, ExprKind::Let(..)));
        assert!(root.free_vars().is_empty());
    }

    #[test]
    fn network_type_must_be_vec_to_vec() {
        assert!(parse("network f : Real -> Real\nlet r : Bool = True").is_err());
    }

    #[test]
    fn higher_order_domain_rejected() {
        assert!(parse_type("(Real -> Real) -> Real").is_err());
        assert_eq!(
            parse_type("Real -> (Real -> Bool)").unwrap(),
            LdlType::curried([LdlType::Real, LdlType::Real], LdlType::Bool)
        );
    }
}
