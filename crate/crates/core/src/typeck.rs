//! Typechecking of resolved expressions.
//!
//! Every binder carries its annotation, so checking is a synthesis pass with
//! a small checking mode for natural-number literals, whose `Index n` type
//! can only be known from context.

use thiserror::Error;

use crate::ast::{BoundTypeCtx, BuiltinOp, Expr, ExprKind, LdlType, NetworkTypeCtx, Span};
use crate::parser::SpecFile;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TypeError {
    #[error("{span}: type mismatch: expected {expected}, found {actual}")]
    TypeMismatch {
        expected: String,
        actual: String,
        span: Span,
    },
    #[error("{span}: unbound variable `{name}`")]
    UnboundVariable { name: String, span: Span },
    #[error("{span}: index {index} is out of range for Index {size}")]
    IndexOutOfRange { index: usize, size: usize, span: Span },
    #[error("{span}: cannot quantify over function type {ty}")]
    QuantifierOverFunctionType { ty: LdlType, span: Span },
    #[error("{span}: quantifier body must have type Bool, found {actual}")]
    NonBooleanQuantifierBody { actual: LdlType, span: Span },
    #[error("{span}: cannot determine the Index size of literal {index}; add an annotation")]
    AmbiguousIndex { index: usize, span: Span },
    #[error("{span}: empty vector literal")]
    EmptyVector { span: Span },
    #[error("{span}: {message}")]
    Malformed { message: String, span: Span },
    #[error("root property `{name}` must have type Bool or a function type ending in Bool, found {ty}")]
    BadRoot { name: String, ty: LdlType },
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::TypeMismatch { .. } => "TypeMismatch",
            TypeError::UnboundVariable { .. } => "UnboundVariable",
            TypeError::IndexOutOfRange { .. } => "IndexOutOfRange",
            TypeError::QuantifierOverFunctionType { .. } => "QuantifierOverFunctionType",
            TypeError::NonBooleanQuantifierBody { .. } => "NonBooleanQuantifierBody",
            TypeError::AmbiguousIndex { .. } => "AmbiguousIndex",
            TypeError::EmptyVector { .. } => "EmptyVector",
            TypeError::Malformed { .. } => "Malformed",
            TypeError::BadRoot { .. } => "BadRoot",
        }
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            TypeError::TypeMismatch { span, .. }
            | TypeError::UnboundVariable { span, .. }
            | TypeError::IndexOutOfRange { span, .. }
            | TypeError::QuantifierOverFunctionType { span, .. }
            | TypeError::NonBooleanQuantifierBody { span, .. }
            | TypeError::AmbiguousIndex { span, .. }
            | TypeError::EmptyVector { span, .. }
            | TypeError::Malformed { span, .. } => Some(*span),
            TypeError::BadRoot { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantifierKind {
    Finite,
    Infinite,
}

/// Quantifiers over `Real` and `Vec n` are infinite; over `Index n` and
/// `Bool` they are finite.
pub fn classify_quantifier(ty: &LdlType) -> QuantifierKind {
    match ty {
        LdlType::Real | LdlType::Vec(_) => QuantifierKind::Infinite,
        _ => QuantifierKind::Finite,
    }
}

/// Synthesizes the type of `e` under the given contexts.
pub fn check(net_ctx: &NetworkTypeCtx, bound_ctx: &BoundTypeCtx, e: &Expr) -> Result<LdlType, TypeError> {
    Checker {
        nets: net_ctx,
        ctx: bound_ctx,
        locals: Vec::new(),
    }
    .synth(e)
}

/// Checks `e` against an expected type (needed for bare index literals).
pub fn check_against(
    net_ctx: &NetworkTypeCtx,
    bound_ctx: &BoundTypeCtx,
    e: &Expr,
    expected: &LdlType,
) -> Result<(), TypeError> {
    Checker {
        nets: net_ctx,
        ctx: bound_ctx,
        locals: Vec::new(),
    }
    .check(e, expected)
}

/// Checks every definition in order and returns the root property's type.
pub fn check_spec(spec: &SpecFile) -> Result<LdlType, TypeError> {
    let nets = spec.network_ctx();
    let mut ctx = BoundTypeCtx::new();
    for d in &spec.definitions {
        if !d.ty.well_formed() {
            return Err(TypeError::Malformed {
                message: format!("ill-formed type annotation {}", d.ty),
                span: d.span,
            });
        }
        check_against(&nets, &ctx, &d.expr, &d.ty)?;
        ctx.push(d.name.clone(), d.ty.clone());
    }
    let root = spec.root();
    if *root.ty.uncurry().1 != LdlType::Bool {
        return Err(TypeError::BadRoot {
            name: root.name.clone(),
            ty: root.ty.clone(),
        });
    }
    Ok(root.ty.clone())
}

fn op_type(op: BuiltinOp) -> Option<LdlType> {
    use BuiltinOp::*;
    use LdlType::{Bool, Real};
    Some(match op {
        And | Or | Implies => LdlType::curried([Bool, Bool], Bool),
        Not => LdlType::fun(Bool, Bool),
        Add | Mul => LdlType::curried([Real, Real], Real),
        Neg => LdlType::fun(Real, Real),
        Eq | Neq | Leq | Geq | Lt | Gt => LdlType::curried([Real, Real], Bool),
        Lookup => return None,
    })
}

struct Checker<'a> {
    nets: &'a NetworkTypeCtx,
    ctx: &'a BoundTypeCtx,
    locals: Vec<LdlType>,
}

impl Checker<'_> {
    fn mismatch(expected: &LdlType, actual: &LdlType, span: Span) -> TypeError {
        TypeError::TypeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
            span,
        }
    }

    fn check(&mut self, e: &Expr, expected: &LdlType) -> Result<(), TypeError> {
        if let ExprKind::Index(i) = e.kind {
            return match expected {
                LdlType::Index(n) if i < *n => Ok(()),
                LdlType::Index(n) => Err(TypeError::IndexOutOfRange {
                    index: i,
                    size: *n,
                    span: e.span,
                }),
                _ => Err(TypeError::TypeMismatch {
                    expected: expected.to_string(),
                    actual: format!("index literal {i}"),
                    span: e.span,
                }),
            };
        }
        // propagate the expected type into let bodies and applied lambdas
        match &e.kind {
            ExprKind::Let(b, bound, body) => {
                self.annotation(&b.ty, e.span)?;
                self.check(bound, &b.ty)?;
                return self.with_local(&b.ty, |c| c.check(body, expected));
            }
            ExprKind::App(f, a) => {
                if let ExprKind::Lam(b, body) = &f.kind {
                    if !b.ty.is_function() {
                        self.annotation(&b.ty, f.span)?;
                        self.check(a, &b.ty)?;
                        return self.with_local(&b.ty, |c| c.check(body, expected));
                    }
                }
            }
            _ => {}
        }
        let actual = self.synth(e)?;
        if actual == *expected {
            Ok(())
        } else {
            Err(Self::mismatch(expected, &actual, e.span))
        }
    }

    fn with_local<T>(&mut self, ty: &LdlType, f: impl FnOnce(&mut Self) -> T) -> T {
        self.locals.push(ty.clone());
        let out = f(self);
        self.locals.pop();
        out
    }

    fn annotation(&self, ty: &LdlType, span: Span) -> Result<(), TypeError> {
        if ty.well_formed() {
            Ok(())
        } else {
            Err(TypeError::Malformed {
                message: format!("ill-formed type annotation {ty}"),
                span,
            })
        }
    }

    fn vec_size(&mut self, v: &Expr) -> Result<usize, TypeError> {
        match self.synth(v)? {
            LdlType::Vec(n) => Ok(n),
            other => Err(TypeError::TypeMismatch {
                expected: "Vec n".into(),
                actual: other.to_string(),
                span: v.span,
            }),
        }
    }

    fn synth(&mut self, e: &Expr) -> Result<LdlType, TypeError> {
        match &e.kind {
            ExprKind::Bound { name, index } => self
                .locals
                .len()
                .checked_sub(index + 1)
                .map(|i| self.locals[i].clone())
                .ok_or_else(|| TypeError::UnboundVariable {
                    name: name.clone(),
                    span: e.span,
                }),
            ExprKind::Free(name) => self.ctx.get(name).cloned().ok_or_else(|| TypeError::UnboundVariable {
                name: name.clone(),
                span: e.span,
            }),
            ExprKind::Network(name) => self
                .nets
                .get(name)
                .map(|&(m, n)| LdlType::fun(LdlType::Vec(m), LdlType::Vec(n)))
                .ok_or_else(|| TypeError::UnboundVariable {
                    name: name.clone(),
                    span: e.span,
                }),
            ExprKind::Real(_) => Ok(LdlType::Real),
            ExprKind::Index(i) => Err(TypeError::AmbiguousIndex {
                index: *i,
                span: e.span,
            }),
            ExprKind::Bool(_) => Ok(LdlType::Bool),
            ExprKind::Op(op) => op_type(*op).ok_or_else(|| TypeError::Malformed {
                message: "lookup `!` must be applied to a vector".into(),
                span: e.span,
            }),
            ExprKind::App(f, a) => {
                if let ExprKind::App(g, v) = &f.kind {
                    if g.kind == ExprKind::Op(BuiltinOp::Lookup) {
                        let n = self.vec_size(v)?;
                        self.check(a, &LdlType::Index(n))?;
                        return Ok(LdlType::Real);
                    }
                }
                if f.kind == ExprKind::Op(BuiltinOp::Lookup) {
                    let n = self.vec_size(a)?;
                    return Ok(LdlType::fun(LdlType::Index(n), LdlType::Real));
                }
                match self.synth(f)? {
                    LdlType::Fun(d, c) => {
                        self.check(a, &d)?;
                        Ok(*c)
                    }
                    other => Err(TypeError::TypeMismatch {
                        expected: "a function".into(),
                        actual: other.to_string(),
                        span: f.span,
                    }),
                }
            }
            ExprKind::Lam(b, body) => {
                self.annotation(&b.ty, e.span)?;
                if b.ty.is_function() {
                    return Err(TypeError::Malformed {
                        message: format!("lambda parameter `{}` must have a simple type, found {}", b.name, b.ty),
                        span: e.span,
                    });
                }
                let body_ty = self.with_local(&b.ty, |c| c.synth(body))?;
                Ok(LdlType::fun(b.ty.clone(), body_ty))
            }
            ExprKind::Let(b, bound, body) => {
                self.annotation(&b.ty, e.span)?;
                self.check(bound, &b.ty)?;
                self.with_local(&b.ty, |c| c.synth(body))
            }
            ExprKind::Quant(_, b, body) => {
                self.annotation(&b.ty, e.span)?;
                if b.ty.is_function() {
                    return Err(TypeError::QuantifierOverFunctionType {
                        ty: b.ty.clone(),
                        span: e.span,
                    });
                }
                let body_ty = self.with_local(&b.ty, |c| c.synth(body))?;
                if body_ty != LdlType::Bool {
                    return Err(TypeError::NonBooleanQuantifierBody {
                        actual: body_ty,
                        span: body.span,
                    });
                }
                Ok(LdlType::Bool)
            }
            ExprKind::Vec(es) => {
                if es.is_empty() {
                    return Err(TypeError::EmptyVector { span: e.span });
                }
                for x in es {
                    self.check(x, &LdlType::Real)?;
                }
                Ok(LdlType::Vec(es.len()))
            }
        }
    }
}
