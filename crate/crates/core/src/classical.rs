//! Two-valued reference semantics. Comparisons are exact, connectives are
//! Boolean, finite quantifiers are enumerated and infinite quantifiers are
//! checked on the same seeded samples the differentiable evaluator uses.

use std::rc::Rc;

use crate::ast::{BoolLit, BuiltinOp, Expr, ExprKind, LdlType, Quantifier};
use crate::eval::{Arg, EvalError, SemanticContext};
use crate::sampling::sample_points;

#[derive(Clone, Debug)]
enum CValue<'e> {
    Real(f64),
    Index(usize),
    Vec(Vec<f64>),
    Bool(bool),
    Closure(&'e Expr, CEnv<'e>),
    Partial(BuiltinOp, Vec<CValue<'e>>),
    Network(String),
}

#[derive(Clone, Debug, Default)]
struct CEnv<'e>(Option<Rc<(CValue<'e>, CEnv<'e>)>>);

impl<'e> CEnv<'e> {
    fn push(&self, v: CValue<'e>) -> Self {
        CEnv(Some(Rc::new((v, self.clone()))))
    }

    fn get(&self, mut i: usize) -> Option<&CValue<'e>> {
        let mut cur = self.0.as_ref()?;
        while i > 0 {
            cur = cur.1 .0.as_ref()?;
            i -= 1;
        }
        Some(&cur.0)
    }
}

fn internal(msg: impl Into<String>) -> EvalError {
    EvalError::Internal(msg.into())
}

struct Classical<'c> {
    ctx: &'c SemanticContext,
}

impl<'c> Classical<'c> {
    fn eval<'e>(&self, e: &'e Expr, env: &CEnv<'e>) -> Result<CValue<'e>, EvalError> {
        Ok(match &e.kind {
            ExprKind::Bound { name, index } => env
                .get(*index)
                .cloned()
                .ok_or_else(|| internal(format!("dangling bound variable `{name}`")))?,
            ExprKind::Free(name) => match self.ctx.free.get(name) {
                Some(Arg::Real(v)) => CValue::Real(*v),
                Some(Arg::Index(i)) => CValue::Index(*i),
                Some(Arg::Vec(v)) => CValue::Vec(v.clone()),
                Some(Arg::Truth(t)) => CValue::Bool(*t == self.ctx.logic.top()),
                None => return Err(EvalError::Unbound(name.clone())),
            },
            ExprKind::Network(n) => CValue::Network(n.clone()),
            ExprKind::Real(v) => CValue::Real(*v),
            ExprKind::Index(i) => CValue::Index(*i),
            ExprKind::Bool(b) => CValue::Bool(*b == BoolLit::Top),
            ExprKind::Op(op) => CValue::Partial(*op, Vec::new()),
            ExprKind::Vec(es) => CValue::Vec(
                es.iter()
                    .map(|x| match self.eval(x, env)? {
                        CValue::Real(r) => Ok(r),
                        _ => Err(internal("vector element is not real")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            ExprKind::Lam(_, body) => CValue::Closure(body, env.clone()),
            ExprKind::Let(_, bound, body) => {
                let v = self.eval(bound, env)?;
                self.eval(body, &env.push(v))?
            }
            ExprKind::App(f, a) => {
                let f = self.eval(f, env)?;
                let a = self.eval(a, env)?;
                self.apply(f, a)?
            }
            ExprKind::Quant(q, b, body) => {
                let domain: Vec<CValue> = match &b.ty {
                    LdlType::Index(n) => (0..*n).map(CValue::Index).collect(),
                    LdlType::Bool => vec![CValue::Bool(true), CValue::Bool(false)],
                    LdlType::Real | LdlType::Vec(_) => {
                        let dist = self
                            .ctx
                            .samplers
                            .get(&b.name)
                            .ok_or_else(|| EvalError::MissingSampler(b.name.clone()))?;
                        sample_points(dist, &self.ctx.sampling, &b.name)
                            .into_iter()
                            .map(|p| match b.ty {
                                LdlType::Real => CValue::Real(p[0]),
                                _ => CValue::Vec(p),
                            })
                            .collect()
                    }
                    LdlType::Fun(..) => return Err(internal("quantifier over a function type")),
                };
                let mut result = *q == Quantifier::Forall;
                for v in domain {
                    let t = self.truth(body, &env.push(v))?;
                    match q {
                        Quantifier::Forall if !t => {
                            result = false;
                            break;
                        }
                        Quantifier::Exists if t => {
                            result = true;
                            break;
                        }
                        _ => {}
                    }
                }
                CValue::Bool(result)
            }
        })
    }

    fn truth<'e>(&self, e: &'e Expr, env: &CEnv<'e>) -> Result<bool, EvalError> {
        match self.eval(e, env)? {
            CValue::Bool(b) => Ok(b),
            _ => Err(internal("expected a Boolean")),
        }
    }

    fn apply<'e>(&self, f: CValue<'e>, a: CValue<'e>) -> Result<CValue<'e>, EvalError> {
        match f {
            CValue::Closure(body, env) => self.eval(body, &env.push(a)),
            CValue::Partial(op, mut args) => {
                args.push(a);
                if args.len() == op.arity() {
                    builtin(op, args)
                } else {
                    Ok(CValue::Partial(op, args))
                }
            }
            CValue::Network(name) => {
                let CValue::Vec(x) = a else {
                    return Err(internal("network applied to a non-vector"));
                };
                let net = self
                    .ctx
                    .networks
                    .get(&name)
                    .ok_or_else(|| EvalError::MissingNetwork(name.clone()))?;
                let y = net.forward(&x).map_err(|e| internal(e.to_string()))?;
                Ok(CValue::Vec(y))
            }
            _ => Err(internal("applied a non-function")),
        }
    }
}

fn builtin(op: BuiltinOp, args: Vec<CValue<'_>>) -> Result<CValue<'_>, EvalError> {
    use BuiltinOp::*;
    let b = |v: &CValue| match v {
        CValue::Bool(b) => Ok(*b),
        _ => Err(internal("expected a Boolean operand")),
    };
    let r = |v: &CValue| match v {
        CValue::Real(x) => Ok(*x),
        _ => Err(internal("expected a real operand")),
    };
    Ok(match op {
        And => CValue::Bool(b(&args[0])? && b(&args[1])?),
        Or => CValue::Bool(b(&args[0])? || b(&args[1])?),
        Implies => CValue::Bool(!b(&args[0])? || b(&args[1])?),
        Not => CValue::Bool(!b(&args[0])?),
        Add => CValue::Real(r(&args[0])? + r(&args[1])?),
        Mul => CValue::Real(r(&args[0])? * r(&args[1])?),
        Neg => CValue::Real(-r(&args[0])?),
        Eq => CValue::Bool(r(&args[0])? == r(&args[1])?),
        Neq => CValue::Bool(r(&args[0])? != r(&args[1])?),
        Leq => CValue::Bool(r(&args[0])? <= r(&args[1])?),
        Geq => CValue::Bool(r(&args[0])? >= r(&args[1])?),
        Lt => CValue::Bool(r(&args[0])? < r(&args[1])?),
        Gt => CValue::Bool(r(&args[0])? > r(&args[1])?),
        Lookup => match (&args[0], &args[1]) {
            (CValue::Vec(v), CValue::Index(i)) => {
                CValue::Real(*v.get(*i).ok_or_else(|| internal("index out of range"))?)
            }
            _ => return Err(internal("bad lookup operands")),
        },
    })
}

/// Classical truth of a Boolean expression `e` applied to `args`. Truth
/// arguments count as true exactly when they equal the logic's top value.
pub fn holds(e: &Expr, ctx: &SemanticContext, args: &[Arg]) -> Result<bool, EvalError> {
    let c = Classical { ctx };
    let mut v = c.eval(e, &CEnv::default())?;
    for a in args {
        let a = match a {
            Arg::Real(x) => CValue::Real(*x),
            Arg::Index(i) => CValue::Index(*i),
            Arg::Vec(x) => CValue::Vec(x.clone()),
            Arg::Truth(t) => CValue::Bool(*t == ctx.logic.top()),
        };
        v = c.apply(v, a)?;
    }
    match v {
        CValue::Bool(b) => Ok(b),
        _ => Err(internal("expression is not Boolean")),
    }
}
