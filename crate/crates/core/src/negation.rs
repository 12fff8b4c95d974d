//! Syntactic preparation for DL2, which has no standalone negation or
//! implication: implications become disjunctions and negations are pushed
//! down to comparisons and truth constants.

use thiserror::Error;

use crate::ast::{Binder, BoolLit, BuiltinOp, Expr, ExprKind, LdlType, Quantifier};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NegationError {
    #[error("negation cannot be pushed through {0}")]
    NotPushable(String),
}

fn describe(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Lam(..) => "a lambda".into(),
        ExprKind::Bound { name, .. } | ExprKind::Free(name) => format!("the Boolean variable `{name}`"),
        ExprKind::App(..) => format!("the application `{e}`"),
        _ => format!("`{e}`"),
    }
}

/// Removes every `not` by pushing it inward. `not` over `and`, `or`, `=>`,
/// comparisons, truth constants, `not`, quantifiers and `let` bodies is
/// rewritten; anything else is an error. Positive implications are kept.
pub fn push_negation(e: &Expr) -> Result<Expr, NegationError> {
    push(e, false, false)
}

/// [`push_negation`] that also rewrites `a => b` into `not a or b`.
pub fn push_negation_and_implications(e: &Expr) -> Result<Expr, NegationError> {
    push(e, false, true)
}

fn bin(op: BuiltinOp, a: Expr, b: Expr, span: crate::ast::Span) -> Expr {
    Expr::binop(op, a, b).with_span(span)
}

fn push(e: &Expr, negate: bool, elim_implies: bool) -> Result<Expr, NegationError> {
    use BuiltinOp::*;
    let span = e.span;
    if let Some((op, args)) = e.as_op_app() {
        match op {
            Not => return push(args[0], !negate, elim_implies),
            And | Or => {
                let a = push(args[0], negate, elim_implies)?;
                let b = push(args[1], negate, elim_implies)?;
                let op = match (op, negate) {
                    (And, false) | (Or, true) => And,
                    _ => Or,
                };
                return Ok(bin(op, a, b, span));
            }
            Implies => {
                if negate {
                    // not (a => b)  ~>  a and not b
                    let a = push(args[0], false, elim_implies)?;
                    let b = push(args[1], true, elim_implies)?;
                    return Ok(bin(And, a, b, span));
                }
                if elim_implies {
                    let a = push(args[0], true, elim_implies)?;
                    let b = push(args[1], false, elim_implies)?;
                    return Ok(bin(Or, a, b, span));
                }
                let a = push(args[0], false, elim_implies)?;
                let b = push(args[1], false, elim_implies)?;
                return Ok(bin(Implies, a, b, span));
            }
            Eq | Neq | Leq | Geq | Lt | Gt => {
                let a = push(args[0], false, elim_implies)?;
                let b = push(args[1], false, elim_implies)?;
                let op = if negate {
                    match op {
                        Eq => Neq,
                        Neq => Eq,
                        Leq => Gt,
                        Geq => Lt,
                        Lt => Geq,
                        _ => Leq,
                    }
                } else {
                    op
                };
                return Ok(bin(op, a, b, span));
            }
            Add | Mul | Neg | Lookup => {}
        }
    }
    match &e.kind {
        ExprKind::Bool(b) if negate => Ok(Expr::from(ExprKind::Bool(match b {
            BoolLit::Top => BoolLit::Bottom,
            BoolLit::Bottom => BoolLit::Top,
        }))
        .with_span(span)),
        ExprKind::Quant(q, b, body) => {
            let q = if negate { q.dual() } else { *q };
            let body = push(body, negate, elim_implies)?;
            Ok(Expr::from(ExprKind::Quant(q, b.clone(), Box::new(body))).with_span(span))
        }
        ExprKind::Let(b, bound, body) => {
            let bound = push(bound, false, elim_implies)?;
            let body = push(body, negate, elim_implies)?;
            Ok(Expr::from(ExprKind::Let(b.clone(), Box::new(bound), Box::new(body))).with_span(span))
        }
        _ if negate => Err(NegationError::NotPushable(describe(e))),
        ExprKind::App(f, a) => {
            let f = push(f, false, elim_implies)?;
            let a = push(a, false, elim_implies)?;
            Ok(Expr::from(ExprKind::App(Box::new(f), Box::new(a))).with_span(span))
        }
        ExprKind::Lam(b, body) => {
            let body = push(body, false, elim_implies)?;
            Ok(Expr::from(ExprKind::Lam(b.clone(), Box::new(body))).with_span(span))
        }
        ExprKind::Vec(es) => Ok(Expr::from(ExprKind::Vec(
            es.iter()
                .map(|x| push(x, false, elim_implies))
                .collect::<Result<_, _>>()?,
        ))
        .with_span(span)),
        _ => Ok(e.clone()),
    }
}

/// Inlines function- and Bool-typed `let`s, beta-reduces applied lambdas
/// into `let`s, and expands quantifiers over `Bool`. Afterwards every `not`
/// that sits above a call of a user-defined predicate can be pushed.
pub fn normalize(e: &Expr) -> Expr {
    let mut n = Normalizer { counter: 0 };
    n.go(e)
}

struct Normalizer {
    counter: usize,
}

impl Normalizer {
    fn fresh(&mut self, hint: &str) -> String {
        self.counter += 1;
        format!("{hint}%{}", self.counter)
    }

    /// Normalizes under a binder by opening it with a fresh free name.
    fn under(&mut self, b: &Binder, body: &Expr) -> Expr {
        let name = self.fresh(&b.name);
        let opened = body.open(&Expr::free(name.clone()));
        self.go(&opened).close(&name)
    }

    fn go(&mut self, e: &Expr) -> Expr {
        let span = e.span;
        match &e.kind {
            ExprKind::Lam(b, body) => {
                Expr::from(ExprKind::Lam(b.clone(), Box::new(self.under(b, body)))).with_span(span)
            }
            ExprKind::Quant(q, b, body) if b.ty == LdlType::Bool => {
                let op = match q {
                    Quantifier::Forall => BuiltinOp::And,
                    Quantifier::Exists => BuiltinOp::Or,
                };
                let t = self.go(&body.open(&Expr::top()));
                let f = self.go(&body.open(&Expr::bottom()));
                Expr::binop(op, t, f).with_span(span)
            }
            ExprKind::Quant(q, b, body) => {
                Expr::from(ExprKind::Quant(*q, b.clone(), Box::new(self.under(b, body)))).with_span(span)
            }
            ExprKind::Let(b, bound, body) => {
                let bound = self.go(bound);
                if b.ty.is_function() || b.ty == LdlType::Bool {
                    self.go(&body.open(&bound))
                } else {
                    Expr::from(ExprKind::Let(b.clone(), Box::new(bound), Box::new(self.under(b, body))))
                        .with_span(span)
                }
            }
            ExprKind::App(f, a) => {
                let f = self.go(f);
                let a = self.go(a);
                match f.kind {
                    ExprKind::Lam(b, body) => {
                        let as_let = Expr::from(ExprKind::Let(b, Box::new(a), body)).with_span(span);
                        self.go(&as_let)
                    }
                    ExprKind::Let(b, bound, body) => {
                        // (let x = e in g) a  ~>  let x = e in (g a); `a` is locally closed
                        let inner = Expr::app(*body, a).with_span(span);
                        let pushed = Expr::from(ExprKind::Let(b, bound, Box::new(inner))).with_span(span);
                        self.go(&pushed)
                    }
                    _ => Expr::from(ExprKind::App(Box::new(f), Box::new(a))).with_span(span),
                }
            }
            ExprKind::Vec(es) => Expr::from(ExprKind::Vec(es.iter().map(|x| self.go(x)).collect())).with_span(span),
            _ => e.clone(),
        }
    }
}

/// Full DL2 preparation: normalize, rewrite implications, push negations.
pub fn prepare_dl2(e: &Expr) -> Result<Expr, NegationError> {
    push_negation_and_implications(&normalize(e))
}
