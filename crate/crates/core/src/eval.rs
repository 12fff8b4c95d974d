//! Evaluation of LDL expressions under a differentiable logic.
//!
//! The evaluator is generic over a [`Backend`] that fixes the scalar type,
//! how networks are called and how infinite quantifiers are resolved. The
//! numeric backend samples; the graph backend in [`crate::graph`] records.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::marker::PhantomData;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::ast::{Binder, BoolLit, BuiltinOp, Expr, ExprKind, LdlType, NetworkTypeCtx, Quantifier};
use crate::logic::{Logic, LogicError, LogicKind};
use crate::negation::{prepare_dl2, NegationError};
use crate::net::{Binding, DenseNetwork};
use crate::parser::SpecFile;
use crate::pretty::{format_real, pretty};
use crate::real::{NumericReal, Real};
use crate::sampling::{extremize, Distribution, Extremum, SamplingConfig, SamplingError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Negation(#[from] NegationError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("no sampler declared for quantified variable `{0}`")]
    MissingSampler(String),
    #[error("sampler for `{name}` has dimension {got}, but the variable has dimension {expected}")]
    SamplerDimension { name: String, expected: usize, got: usize },
    #[error("no implementation loaded for network `{0}`")]
    MissingNetwork(String),
    #[error("network `{name}` is declared Vec {declared_in} -> Vec {declared_out} but the loaded network maps {actual_in} -> {actual_out}")]
    NetworkShape {
        name: String,
        declared_in: usize,
        declared_out: usize,
        actual_in: usize,
        actual_out: usize,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("the property takes {expected} arguments but {got} were supplied")]
    Arity { expected: usize, got: usize },
    #[error("argument `{name}`: {message}")]
    BadArgument { name: String, message: String },
    #[error("{0}")]
    Internal(String),
}

/// A first-order value supplied from outside: a root argument or the value
/// of a free variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Real(f64),
    Index(usize),
    Vec(Vec<f64>),
    Truth(f64),
}

impl Arg {
    /// Checks that the argument inhabits `ty`.
    pub fn check(&self, ty: &LdlType) -> Result<(), String> {
        match (self, ty) {
            (Arg::Real(_), LdlType::Real) | (Arg::Truth(_), LdlType::Bool) => Ok(()),
            (Arg::Index(i), LdlType::Index(n)) if i < n => Ok(()),
            (Arg::Index(i), LdlType::Index(n)) => Err(format!("index {i} out of range for Index {n}")),
            (Arg::Vec(v), LdlType::Vec(n)) if v.len() == *n => Ok(()),
            (Arg::Vec(v), LdlType::Vec(n)) => Err(format!("expected {n} components, got {}", v.len())),
            (a, t) => Err(format!("value {a:?} does not have type {t}")),
        }
    }

    /// Converts a context-file binding to an argument of type `ty`.
    pub fn from_binding(b: &Binding, ty: &LdlType, logic: &Logic) -> Result<Arg, String> {
        let arg = match (b, ty) {
            (Binding::Bool(v), LdlType::Bool) => Arg::Truth(if *v { logic.top() } else { logic.bottom() }),
            (Binding::Scalar(v), LdlType::Real) => Arg::Real(*v),
            (Binding::Scalar(v), LdlType::Index(_)) if *v >= 0.0 && v.fract() == 0.0 => Arg::Index(*v as usize),
            (Binding::Vector(v), LdlType::Vec(_)) => Arg::Vec(v.clone()),
            (b, t) => return Err(format!("binding {b:?} does not fit type {t}")),
        };
        arg.check(ty)?;
        Ok(arg)
    }
}

/// The evaluated result of a closed expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Real(f64),
    Index(usize),
    Vec(Vec<f64>),
    Truth(f64),
    Function,
}

impl std::fmt::Display for Output {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Output::Real(v) | Output::Truth(v) => f.write_str(&format_real(*v)),
            Output::Index(i) => write!(f, "{i}"),
            Output::Vec(v) => {
                let parts: Vec<String> = v.iter().map(|x| format_real(*x)).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            Output::Function => f.write_str("<function>"),
        }
    }
}

/// Everything an expression needs besides its syntax.
#[derive(Clone, Debug)]
pub struct SemanticContext {
    pub logic: Logic,
    pub sampling: SamplingConfig,
    pub networks: BTreeMap<String, Arc<DenseNetwork>>,
    pub samplers: BTreeMap<String, Distribution>,
    /// Values of free variables.
    pub free: BTreeMap<String, Arg>,
}

impl SemanticContext {
    pub fn new(logic: Logic) -> Self {
        SemanticContext {
            logic,
            sampling: SamplingConfig::default(),
            networks: BTreeMap::new(),
            samplers: BTreeMap::new(),
            free: BTreeMap::new(),
        }
    }

    pub fn with_network(mut self, name: impl Into<String>, net: DenseNetwork) -> Self {
        self.networks.insert(name.into(), Arc::new(net));
        self
    }

    pub fn with_sampler(mut self, name: impl Into<String>, dist: Distribution) -> Self {
        self.samplers.insert(name.into(), dist);
        self
    }

    pub fn with_sampling(mut self, cfg: SamplingConfig) -> Self {
        self.sampling = cfg;
        self
    }

    pub fn with_free(mut self, name: impl Into<String>, value: Arg) -> Self {
        self.free.insert(name.into(), value);
        self
    }

    /// Checks logic parameters, the sampling configuration and that every
    /// network and quantified variable `e` needs is provided with the right
    /// shape. `declared` gives the declared network types.
    pub fn check_for(&self, e: &Expr, declared: &NetworkTypeCtx) -> Result<(), EvalError> {
        self.logic.validate()?;
        self.sampling.validate()?;
        for name in e.networks() {
            let net = self
                .networks
                .get(&name)
                .ok_or_else(|| EvalError::MissingNetwork(name.clone()))?;
            if let Some(&(din, dout)) = declared.get(&name) {
                if (net.input_dim(), net.output_dim()) != (din, dout) {
                    return Err(EvalError::NetworkShape {
                        name,
                        declared_in: din,
                        declared_out: dout,
                        actual_in: net.input_dim(),
                        actual_out: net.output_dim(),
                    });
                }
            }
        }
        for b in infinite_binders(e) {
            let dim = b.ty.real_dim().expect("infinite binders are real-valued");
            let dist = self
                .samplers
                .get(&b.name)
                .ok_or_else(|| EvalError::MissingSampler(b.name.clone()))?;
            dist.validate()?;
            if dist.dim() != dim {
                return Err(EvalError::SamplerDimension {
                    name: b.name.clone(),
                    expected: dim,
                    got: dist.dim(),
                });
            }
        }
        Ok(())
    }
}

/// Binders of all quantifiers over `Real` or `Vec n` in `e`.
pub fn infinite_binders(e: &Expr) -> Vec<Binder> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    e.visit(&mut |n, _| {
        if let ExprKind::Quant(_, b, _) = &n.kind {
            if b.ty.real_dim().is_some() && seen.insert((b.name.clone(), b.ty.to_string())) {
                out.push(b.clone());
            }
        }
    });
    out
}

// ---------------------------------------------------------------------------
// values and environments

/// Immutable linked list of de Bruijn-indexed values.
pub struct Env<'e, R>(Option<Rc<EnvNode<'e, R>>>);

pub struct EnvNode<'e, R> {
    value: Value<'e, R>,
    next: Env<'e, R>,
}

impl<R> Clone for Env<'_, R> {
    fn clone(&self) -> Self {
        Env(self.0.clone())
    }
}

impl<'e, R> Env<'e, R> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn push(&self, value: Value<'e, R>) -> Self {
        Env(Some(Rc::new(EnvNode {
            value,
            next: self.clone(),
        })))
    }

    pub fn get(&self, index: usize) -> Option<&Value<'e, R>> {
        let mut cur = self.0.as_ref()?;
        for _ in 0..index {
            cur = cur.next.0.as_ref()?;
        }
        Some(&cur.value)
    }
}

pub enum Value<'e, R> {
    Real(R),
    Index(usize),
    Vec(Vec<R>),
    Truth(R),
    Closure {
        binder: &'e Binder,
        body: &'e Expr,
        env: Env<'e, R>,
    },
    /// A builtin applied to fewer arguments than its arity.
    Partial(BuiltinOp, Vec<Value<'e, R>>),
    Network(String),
}

impl<R: Clone> Clone for Value<'_, R> {
    fn clone(&self) -> Self {
        match self {
            Value::Real(r) => Value::Real(r.clone()),
            Value::Index(i) => Value::Index(*i),
            Value::Vec(v) => Value::Vec(v.clone()),
            Value::Truth(r) => Value::Truth(r.clone()),
            Value::Closure { binder, body, env } => Value::Closure {
                binder,
                body,
                env: env.clone(),
            },
            Value::Partial(op, args) => Value::Partial(*op, args.clone()),
            Value::Network(n) => Value::Network(n.clone()),
        }
    }
}

impl<'e, R: Real> Value<'e, R> {
    pub fn from_arg(a: &Arg) -> Self {
        match a {
            Arg::Real(v) => Value::Real(R::cst(*v)),
            Arg::Index(i) => Value::Index(*i),
            Arg::Vec(v) => Value::Vec(v.iter().map(|x| R::cst(*x)).collect()),
            Arg::Truth(v) => Value::Truth(R::cst(*v)),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Real(_) => "real",
            Value::Index(_) => "index",
            Value::Vec(_) => "vector",
            Value::Truth(_) => "truth value",
            Value::Closure { .. } | Value::Partial(..) | Value::Network(_) => "function",
        }
    }
}

/// Value of a sample point for a variable of type `ty` (`Real` or `Vec n`).
pub fn point_value<'e, R: Real>(ty: &LdlType, p: &[f64]) -> Value<'e, R> {
    match ty {
        LdlType::Real => Value::Real(R::cst(p[0])),
        _ => Value::Vec(p.iter().map(|x| R::cst(*x)).collect()),
    }
}

// ---------------------------------------------------------------------------
// backends

pub trait Backend: Sized {
    type R: Real;

    fn network(&mut self, name: &str, input: &[Self::R], output_dim: usize) -> Result<Vec<Self::R>, EvalError>;

    /// Truth value of a quantifier over `Real` or `Vec n`.
    fn infinite<'e>(
        ev: &mut Evaluator<'e, Self>,
        q: Quantifier,
        binder: &'e Binder,
        body: &'e Expr,
        env: &Env<'e, Self::R>,
    ) -> Result<Self::R, EvalError>;

    /// Eager value of a scalar, if this backend has one. Used for tracing.
    fn observe(_r: &Self::R) -> Option<f64> {
        None
    }
}

/// Backend over eagerly computed scalars (`f64` or [`crate::tape::TapeVar`]).
pub struct NumericBackend<'c, R> {
    ctx: &'c SemanticContext,
    _scalar: PhantomData<R>,
}

impl<'c, R> NumericBackend<'c, R> {
    pub fn new(ctx: &'c SemanticContext) -> Self {
        NumericBackend {
            ctx,
            _scalar: PhantomData,
        }
    }
}

impl<R: NumericReal> Backend for NumericBackend<'_, R> {
    type R = R;

    fn network(&mut self, name: &str, input: &[R], output_dim: usize) -> Result<Vec<R>, EvalError> {
        let net = self
            .ctx
            .networks
            .get(name)
            .ok_or_else(|| EvalError::MissingNetwork(name.to_string()))?;
        if net.input_dim() != input.len() || net.output_dim() != output_dim {
            return Err(EvalError::NetworkShape {
                name: name.to_string(),
                declared_in: input.len(),
                declared_out: output_dim,
                actual_in: net.input_dim(),
                actual_out: net.output_dim(),
            });
        }
        Ok(R::apply_network(name, net, input))
    }

    fn infinite<'e>(
        ev: &mut Evaluator<'e, Self>,
        q: Quantifier,
        binder: &'e Binder,
        body: &'e Expr,
        env: &Env<'e, R>,
    ) -> Result<R, EvalError> {
        let ctx = ev.backend.ctx;
        let dim = binder
            .ty
            .real_dim()
            .ok_or_else(|| EvalError::Internal(format!("`{}` is not real-valued", binder.name)))?;
        let dist = ctx
            .samplers
            .get(&binder.name)
            .ok_or_else(|| EvalError::MissingSampler(binder.name.clone()))?;
        if dist.dim() != dim {
            return Err(EvalError::SamplerDimension {
                name: binder.name.clone(),
                expected: dim,
                got: dist.dim(),
            });
        }
        let ext = match q {
            Quantifier::Forall => Extremum::Min,
            Quantifier::Exists => Extremum::Max,
        };
        ev.suspend_trace(true);
        let res = extremize(dist, &ctx.sampling, &binder.name, ext, |p| {
            let mark = R::scratch_begin();
            let v = ev.truth(body, &env.push(point_value(&binder.ty, p))).map(|v| v.value());
            R::scratch_end(mark);
            v
        });
        ev.suspend_trace(false);
        let res = res?;
        ev.note(|| {
            let pts: Vec<String> = res.point.iter().map(|x| format_real(*x)).collect();
            format!(
                "{} {}: extremum {} at [{}]",
                q.keyword(),
                binder.name,
                format_real(res.value),
                pts.join(", ")
            )
        });
        // a traced run re-evaluates the winner so that its nodes are listed
        if R::REPLAY || ev.tracing() {
            ev.truth(body, &env.push(point_value(&binder.ty, &res.point)))
        } else {
            Ok(R::cst(res.value))
        }
    }

    fn observe(r: &R) -> Option<f64> {
        Some(r.value())
    }
}

// ---------------------------------------------------------------------------
// the evaluator

const TRACE_LIMIT: usize = 100_000;

struct Trace {
    lines: Vec<String>,
    depth: usize,
    suspended: usize,
}

pub struct Evaluator<'e, B: Backend> {
    pub backend: B,
    pub logic: Logic,
    net_dims: NetworkTypeCtx,
    free: BTreeMap<String, Value<'e, B::R>>,
    trace: Option<Trace>,
}

impl<'e, B: Backend> Evaluator<'e, B> {
    pub fn new(backend: B, logic: Logic, net_dims: NetworkTypeCtx) -> Self {
        Evaluator {
            backend,
            logic,
            net_dims,
            free: BTreeMap::new(),
            trace: None,
        }
    }

    pub fn bind_free(&mut self, name: impl Into<String>, v: Value<'e, B::R>) {
        self.free.insert(name.into(), v);
    }

    /// Starts recording one line per evaluated operator, quantifier and
    /// network call.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Trace {
            lines: Vec::new(),
            depth: 0,
            suspended: 0,
        });
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.take().map(|t| t.lines).unwrap_or_default()
    }

    fn suspend_trace(&mut self, on: bool) {
        if let Some(t) = &mut self.trace {
            if on {
                t.suspended += 1;
            } else {
                t.suspended -= 1;
            }
        }
    }

    fn note(&mut self, line: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            if t.suspended == 0 && t.lines.len() < TRACE_LIMIT {
                let indent = "  ".repeat(t.depth);
                t.lines.push(format!("{indent}{}", line()));
            }
        }
    }

    fn tracing(&self) -> bool {
        self.trace.as_ref().is_some_and(|t| t.suspended == 0)
    }

    fn traces(&self, e: &Expr) -> bool {
        self.trace.as_ref().is_some_and(|t| t.suspended == 0)
            && matches!(e.kind, ExprKind::App(..) | ExprKind::Quant(..))
    }

    pub fn eval(&mut self, e: &'e Expr, env: &Env<'e, B::R>) -> Result<Value<'e, B::R>, EvalError> {
        if !self.traces(e) {
            return self.eval_inner(e, env);
        }
        let slot = {
            let t = self.trace.as_mut().expect("tracing");
            t.depth += 1;
            t.lines.push(String::new());
            t.lines.len() - 1
        };
        let v = self.eval_inner(e, env);
        let t = self.trace.as_mut().expect("tracing");
        t.depth -= 1;
        let shown = match &v {
            Ok(Value::Real(r)) | Ok(Value::Truth(r)) => B::observe(r).map(format_real),
            Ok(Value::Vec(xs)) => {
                let parts: Option<Vec<String>> = xs.iter().take(8).map(|x| B::observe(x).map(format_real)).collect();
                parts.map(|p| format!("[{}{}]", p.join(", "), if xs.len() > 8 { ", ..." } else { "" }))
            }
            _ => None,
        };
        match shown {
            Some(s) if slot < TRACE_LIMIT => {
                let mut text = pretty(e);
                if text.chars().count() > 72 {
                    text = text.chars().take(69).collect::<String>() + "...";
                }
                t.lines[slot] = format!("{}{text} = {s}", "  ".repeat(t.depth));
            }
            _ => {
                if slot < t.lines.len() && t.lines[slot].is_empty() {
                    t.lines.remove(slot);
                }
            }
        }
        if t.lines.len() > TRACE_LIMIT {
            t.lines.truncate(TRACE_LIMIT);
        }
        v
    }

    fn eval_inner(&mut self, e: &'e Expr, env: &Env<'e, B::R>) -> Result<Value<'e, B::R>, EvalError> {
        match &e.kind {
            ExprKind::Bound { name, index } => env
                .get(*index)
                .cloned()
                .ok_or_else(|| EvalError::Internal(format!("dangling bound variable `{name}`"))),
            ExprKind::Free(name) => self.free.get(name).cloned().ok_or_else(|| EvalError::Unbound(name.clone())),
            ExprKind::Network(name) => Ok(Value::Network(name.clone())),
            ExprKind::Real(v) => Ok(Value::Real(B::R::cst(*v))),
            ExprKind::Index(i) => Ok(Value::Index(*i)),
            ExprKind::Bool(b) => Ok(Value::Truth(B::R::cst(self.bool_value(*b)))),
            ExprKind::Op(op) => Ok(Value::Partial(*op, Vec::new())),
            ExprKind::Vec(es) => {
                let mut out = Vec::with_capacity(es.len());
                for x in es {
                    out.push(self.real(x, env)?);
                }
                Ok(Value::Vec(out))
            }
            ExprKind::Lam(binder, body) => Ok(Value::Closure {
                binder,
                body,
                env: env.clone(),
            }),
            ExprKind::Let(_, bound, body) => {
                let v = self.eval(bound, env)?;
                self.eval(body, &env.push(v))
            }
            ExprKind::App(f, a) => {
                if let Some((op, args)) = e.as_op_app() {
                    return self.eval_op(e, op, &args, env);
                }
                let f = self.eval(f, env)?;
                let a = self.eval(a, env)?;
                self.apply(f, a)
            }
            ExprKind::Quant(q, binder, body) => {
                let t = match &binder.ty {
                    LdlType::Index(_) | LdlType::Bool => self.finite_quantifier(e, *q, binder, body, env)?,
                    _ => B::infinite(self, *q, binder, body, env)?,
                };
                Ok(Value::Truth(t))
            }
        }
    }

    fn bool_value(&self, b: BoolLit) -> f64 {
        match b {
            BoolLit::Top => self.logic.top(),
            BoolLit::Bottom => self.logic.bottom(),
        }
    }

    /// Values of a finite quantifier domain, in enumeration order.
    fn domain(&self, ty: &LdlType) -> Vec<Value<'e, B::R>> {
        match ty {
            LdlType::Index(n) => (0..*n).map(Value::Index).collect(),
            LdlType::Bool => vec![
                Value::Truth(B::R::cst(self.logic.top())),
                Value::Truth(B::R::cst(self.logic.bottom())),
            ],
            _ => Vec::new(),
        }
    }

    fn finite_quantifier(
        &mut self,
        e: &'e Expr,
        q: Quantifier,
        binder: &'e Binder,
        body: &'e Expr,
        env: &Env<'e, B::R>,
    ) -> Result<B::R, EvalError> {
        let op = match q {
            Quantifier::Forall => BuiltinOp::And,
            Quantifier::Exists => BuiltinOp::Or,
        };
        let mut vals = Vec::new();
        if self.logic.kind == LogicKind::Stl {
            self.collect(op, e, env, &mut vals)?;
        } else {
            for v in self.domain(&binder.ty) {
                vals.push(self.truth(body, &env.push(v))?);
            }
        }
        if vals.is_empty() {
            return Err(EvalError::Internal("quantifier over an empty domain".into()));
        }
        Ok(match op {
            BuiltinOp::And => self.logic.and_n(&vals),
            _ => self.logic.or_n(&vals),
        })
    }

    /// Gathers the operands of a maximal run of `op` (`and` or `or`),
    /// splicing in the expansions of matching finite quantifiers. STL
    /// interprets the whole run as a single n-ary connective.
    fn collect(
        &mut self,
        op: BuiltinOp,
        e: &'e Expr,
        env: &Env<'e, B::R>,
        out: &mut Vec<B::R>,
    ) -> Result<(), EvalError> {
        if let Some((op2, args)) = e.as_op_app() {
            if op2 == op {
                self.collect(op, args[0], env, out)?;
                return self.collect(op, args[1], env, out);
            }
        }
        if let ExprKind::Quant(q, binder, body) = &e.kind {
            let matches = matches!(
                (q, op),
                (Quantifier::Forall, BuiltinOp::And) | (Quantifier::Exists, BuiltinOp::Or)
            );
            if matches && matches!(binder.ty, LdlType::Index(_) | LdlType::Bool) {
                for v in self.domain(&binder.ty) {
                    self.collect(op, body, &env.push(v), out)?;
                }
                return Ok(());
            }
        }
        out.push(self.truth(e, env)?);
        Ok(())
    }

    fn eval_op(
        &mut self,
        e: &'e Expr,
        op: BuiltinOp,
        args: &[&'e Expr],
        env: &Env<'e, B::R>,
    ) -> Result<Value<'e, B::R>, EvalError> {
        if matches!(op, BuiltinOp::And | BuiltinOp::Or) && self.logic.kind == LogicKind::Stl {
            let mut vals = Vec::new();
            self.collect(op, e, env, &mut vals)?;
            return Ok(Value::Truth(if op == BuiltinOp::And {
                self.logic.and_n(&vals)
            } else {
                self.logic.or_n(&vals)
            }));
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a, env)?);
        }
        self.builtin(op, vals)
    }

    /// Applies a saturated builtin.
    fn builtin(&mut self, op: BuiltinOp, args: Vec<Value<'e, B::R>>) -> Result<Value<'e, B::R>, EvalError> {
        use BuiltinOp::*;
        let mut it = args.into_iter();
        let mut next = || it.next().ok_or_else(|| EvalError::Internal(format!("`{}` is missing an operand", op.symbol())));
        let l = self.logic;
        Ok(match op {
            And | Or | Implies => {
                let a = as_truth(next()?, op)?;
                let b = as_truth(next()?, op)?;
                Value::Truth(match op {
                    And => l.and(&a, &b),
                    Or => l.or(&a, &b),
                    _ => l.implies(&a, &b)?,
                })
            }
            Not => Value::Truth(l.not(&as_truth(next()?, op)?)?),
            Add => {
                let a = as_real(next()?, op)?;
                Value::Real(a.add(&as_real(next()?, op)?))
            }
            Mul => {
                let a = as_real(next()?, op)?;
                Value::Real(a.mul(&as_real(next()?, op)?))
            }
            Neg => Value::Real(as_real(next()?, op)?.neg()),
            Lookup => {
                let v = next()?;
                let i = next()?;
                match (v, i) {
                    (Value::Vec(xs), Value::Index(i)) => Value::Real(
                        xs.get(i)
                            .cloned()
                            .ok_or_else(|| EvalError::Internal(format!("index {i} out of range for length {}", xs.len())))?,
                    ),
                    (v, i) => {
                        return Err(EvalError::Internal(format!(
                            "`!` applied to a {} and a {}",
                            v.kind(),
                            i.kind()
                        )))
                    }
                }
            }
            Eq | Neq | Leq | Geq | Lt | Gt => {
                let a = as_real(next()?, op)?;
                let b = as_real(next()?, op)?;
                Value::Truth(l.compare(op, &a, &b))
            }
        })
    }

    pub fn apply(&mut self, f: Value<'e, B::R>, a: Value<'e, B::R>) -> Result<Value<'e, B::R>, EvalError> {
        match f {
            Value::Closure { body, env, .. } => self.eval(body, &env.push(a)),
            Value::Partial(op, mut args) => {
                args.push(a);
                if args.len() == op.arity() {
                    self.builtin(op, args)
                } else {
                    Ok(Value::Partial(op, args))
                }
            }
            Value::Network(name) => {
                let Value::Vec(xs) = a else {
                    return Err(EvalError::Internal(format!("network `{name}` applied to a {}", a.kind())));
                };
                let dims = self.net_dims.get(&name).copied();
                let out_dim = dims.map_or(0, |d| d.1);
                let out = self.backend.network(&name, &xs, out_dim)?;
                if self.trace.is_some() {
                    let shown: Vec<String> = out.iter().filter_map(B::observe).map(format_real).collect();
                    self.note(|| format!("network {name} -> [{}]", shown.join(", ")));
                }
                Ok(Value::Vec(out))
            }
            other => Err(EvalError::Internal(format!("a {} cannot be applied", other.kind()))),
        }
    }

    pub fn truth(&mut self, e: &'e Expr, env: &Env<'e, B::R>) -> Result<B::R, EvalError> {
        match self.eval(e, env)? {
            Value::Truth(t) => Ok(t),
            v => Err(EvalError::Internal(format!("expected a truth value, found a {}", v.kind()))),
        }
    }

    pub fn real(&mut self, e: &'e Expr, env: &Env<'e, B::R>) -> Result<B::R, EvalError> {
        match self.eval(e, env)? {
            Value::Real(r) => Ok(r),
            v => Err(EvalError::Internal(format!("expected a real, found a {}", v.kind()))),
        }
    }
}

fn as_truth<R>(v: Value<'_, R>, op: BuiltinOp) -> Result<R, EvalError>
where
    R: Real,
{
    match v {
        Value::Truth(t) => Ok(t),
        v => Err(EvalError::Internal(format!("`{}` expects truth values, found a {}", op.symbol(), v.kind()))),
    }
}

fn as_real<R: Real>(v: Value<'_, R>, op: BuiltinOp) -> Result<R, EvalError> {
    match v {
        Value::Real(t) => Ok(t),
        v => Err(EvalError::Internal(format!("`{}` expects reals, found a {}", op.symbol(), v.kind()))),
    }
}

// ---------------------------------------------------------------------------
// entry points

/// Logic-specific syntactic preparation: DL2 gets implications rewritten and
/// negations pushed to the comparisons; other logics use `e` as is.
pub fn prepare<'a>(e: &'a Expr, logic: &Logic) -> Result<Cow<'a, Expr>, EvalError> {
    if logic.kind == LogicKind::Dl2 {
        Ok(Cow::Owned(prepare_dl2(e)?))
    } else {
        Ok(Cow::Borrowed(e))
    }
}

fn net_dims_of(ctx: &SemanticContext) -> NetworkTypeCtx {
    ctx.networks
        .iter()
        .map(|(n, net)| (n.clone(), (net.input_dim(), net.output_dim())))
        .collect()
}

fn to_output(v: Value<'_, f64>) -> Output {
    match v {
        Value::Real(r) => Output::Real(r),
        Value::Index(i) => Output::Index(i),
        Value::Vec(v) => Output::Vec(v),
        Value::Truth(t) => Output::Truth(t),
        _ => Output::Function,
    }
}

fn run_f64(e: &Expr, ctx: &SemanticContext, args: &[Arg], trace: bool) -> Result<(Output, Vec<String>), EvalError> {
    ctx.check_for(e, &net_dims_of(ctx))?;
    let prepared = prepare(e, &ctx.logic)?;
    let mut ev = Evaluator::new(NumericBackend::<f64>::new(ctx), ctx.logic, net_dims_of(ctx));
    for (name, a) in &ctx.free {
        ev.bind_free(name.clone(), Value::from_arg(a));
    }
    if trace {
        ev.enable_trace();
    }
    let mut v = ev.eval(&prepared, &Env::empty())?;
    for a in args {
        v = ev.apply(v, Value::from_arg(a))?;
    }
    let lines = ev.take_trace();
    Ok((to_output(v), lines))
}

/// Evaluates `e` with `f64` scalars. Free variables come from `ctx.free`.
pub fn evaluate(e: &Expr, ctx: &SemanticContext) -> Result<Output, EvalError> {
    Ok(run_f64(e, ctx, &[], false)?.0)
}

/// Evaluates `e` applied to `args`.
pub fn evaluate_applied(e: &Expr, ctx: &SemanticContext, args: &[Arg]) -> Result<Output, EvalError> {
    Ok(run_f64(e, ctx, args, false)?.0)
}

/// [`evaluate_applied`] that also returns a per-node trace.
pub fn evaluate_traced(e: &Expr, ctx: &SemanticContext, args: &[Arg]) -> Result<(Output, Vec<String>), EvalError> {
    run_f64(e, ctx, args, true)
}

/// Parameter binders of a property, read off its leading lambdas (looking
/// through `let` bodies), with placeholder names when the definition is not
/// a syntactic lambda.
pub fn root_params(name_source: &Expr, ty: &LdlType) -> Vec<Binder> {
    let (params, _) = ty.uncurry();
    let mut names = Vec::new();
    let mut cur = name_source;
    loop {
        match &cur.kind {
            ExprKind::Lam(b, body) => {
                names.push(b.name.clone());
                cur = body;
            }
            ExprKind::Let(_, _, body) => cur = body,
            _ => break,
        }
    }
    params
        .into_iter()
        .enumerate()
        .map(|(k, t)| Binder::new(names.get(k).cloned().unwrap_or_else(|| format!("arg{k}")), t.clone()))
        .collect()
}

/// Parameters of the root property of `spec`.
pub fn spec_params(spec: &SpecFile) -> Vec<Binder> {
    let root = spec.root();
    root_params(&root.expr, &root.ty)
}

/// Builds root arguments from context-file bindings.
pub fn args_from_bindings(
    params: &[Binder],
    bindings: &BTreeMap<String, Binding>,
    logic: &Logic,
) -> Result<Vec<Arg>, EvalError> {
    params
        .iter()
        .map(|p| {
            let b = bindings.get(&p.name).ok_or_else(|| EvalError::BadArgument {
                name: p.name.clone(),
                message: "no binding supplied".into(),
            })?;
            Arg::from_binding(b, &p.ty, logic).map_err(|message| EvalError::BadArgument {
                name: p.name.clone(),
                message,
            })
        })
        .collect()
}

fn check_args(params: &[Binder], args: &[Arg]) -> Result<(), EvalError> {
    if params.len() != args.len() {
        return Err(EvalError::Arity {
            expected: params.len(),
            got: args.len(),
        });
    }
    for (p, a) in params.iter().zip(args) {
        a.check(&p.ty).map_err(|message| EvalError::BadArgument {
            name: p.name.clone(),
            message,
        })?;
    }
    Ok(())
}

/// Truth value of an already prepared root expression applied to `args`,
/// with scalar type `R`. Callers that evaluate repeatedly should
/// [`prepare`] once and call this.
pub fn apply_prepared<R: NumericReal>(prepared: &Expr, ctx: &SemanticContext, args: &[Arg]) -> Result<R, EvalError> {
    let mut ev = Evaluator::new(NumericBackend::<R>::new(ctx), ctx.logic, net_dims_of(ctx));
    for (name, a) in &ctx.free {
        ev.bind_free(name.clone(), Value::from_arg(a));
    }
    let mut v = ev.eval(prepared, &Env::empty())?;
    for a in args {
        v = ev.apply(v, Value::from_arg(a))?;
    }
    match v {
        Value::Truth(t) => Ok(t),
        v => Err(EvalError::Internal(format!("property evaluated to a {}", v.kind()))),
    }
}

/// Checks `ctx` against the root property of `spec` and `args` against its
/// parameters, and returns the prepared root expression.
pub fn prepare_spec(spec: &SpecFile, ctx: &SemanticContext, args: &[Arg]) -> Result<Expr, EvalError> {
    check_args(&spec_params(spec), args)?;
    let root = spec.root_expr();
    let prepared = prepare(&root, &ctx.logic)?.into_owned();
    ctx.check_for(&prepared, &spec.network_ctx())?;
    Ok(prepared)
}

/// Truth value of the root property of `spec` applied to `args`.
pub fn truth_value(spec: &SpecFile, ctx: &SemanticContext, args: &[Arg]) -> Result<f64, EvalError> {
    let prepared = prepare_spec(spec, ctx, args)?;
    apply_prepared::<f64>(&prepared, ctx, args)
}

/// Penalty of the root property: zero exactly when it is fully satisfied.
pub fn loss(spec: &SpecFile, ctx: &SemanticContext, args: &[Arg]) -> Result<f64, EvalError> {
    let t = truth_value(spec, ctx, args)?;
    Ok(ctx.logic.penalty(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_expr};

    fn ctx(kind: LogicKind) -> SemanticContext {
        SemanticContext::new(Logic::new(kind))
    }

    fn ev(src: &str, c: &SemanticContext) -> Output {
        let e = parse_expr(src, &net_dims_of(c), &[]).unwrap();
        evaluate(&e, c).unwrap()
    }

    #[test]
    fn arithmetic_and_lets() {
        let c = ctx(LogicKind::Godel);
        assert_eq!(ev("let (x : Real) = 2.0 in x * x + 1.0", &c), Output::Real(5.0));
        assert_eq!(ev("[1.0, 2.5, -3.0] ! 2", &c), Output::Real(-3.0));
        assert_eq!(ev("(lam (a : Real) (b : Real) . a - b) 5.0 2.0", &c), Output::Real(3.0));
        assert_eq!(ev("(+) 1.0 2.0", &c), Output::Real(3.0));
    }

    #[test]
    fn comparisons_per_logic() {
        assert_eq!(ev("1.0 <= 3.0", &ctx(LogicKind::Dl2)), Output::Truth(0.0));
        assert_eq!(ev("3.0 <= 1.0", &ctx(LogicKind::Dl2)), Output::Truth(-2.0));
        assert_eq!(ev("3.0 <= 1.0", &ctx(LogicKind::Stl)), Output::Truth(-2.0));
        assert_eq!(ev("1.0 <= 3.0", &ctx(LogicKind::Godel)), Output::Truth(1.0 - 2.0f64.tanh()));
    }

    #[test]
    fn finite_quantifiers_fold() {
        let c = ctx(LogicKind::Product);
        let v = ev("forall (i : Index 3) . [0.0, 0.0, 1.0] ! i == 0.0", &c);
        let t = 1.0 - 1.0f64.tanh();
        assert_eq!(v, Output::Truth(t));
        let d = ctx(LogicKind::Dl2);
        // DL2 conjunction is a sum of the comparison values
        assert_eq!(ev("forall (i : Index 3) . [1.0, 2.0, 3.0] ! i <= 1.5", &d), Output::Truth(-2.0));
    }

    #[test]
    fn stl_flattens_runs() {
        let c = ctx(LogicKind::Stl);
        let flat = ev("1.0 <= 2.0 and 2.0 <= 1.0 and 0.0 <= 3.0", &c);
        let want = f64::and_stl(1.0, &[1.0, -1.0, 3.0]);
        assert_eq!(flat, Output::Truth(want));
        let quant = ev("forall (i : Index 3) . [1.0, -1.0, 3.0] ! i >= 0.0", &c);
        assert_eq!(quant, Output::Truth(want));
    }

    #[test]
    fn dl2_rewrites_negation_and_implication() {
        let c = ctx(LogicKind::Dl2);
        // not (1 <= 3) becomes 1 > 3: -max(3 - 1, 0) + -xi [1 = 3]
        assert_eq!(ev("not (1.0 <= 3.0)", &c), Output::Truth(-2.0));
        // (1 <= 0) => True  ~>  1 > 0 or True  ~>  -(0 * 0)
        assert_eq!(ev("1.0 <= 0.0 => True", &c), Output::Truth(0.0));
    }

    #[test]
    fn infinite_quantifier_samples() {
        let c = ctx(LogicKind::Godel)
            .with_sampler("x", Distribution::uniform(vec![0.0], vec![1.0]))
            .with_sampling(SamplingConfig::new(32, 3, 0));
        let e = parse_expr("forall (x : Real) . x <= x", &NetworkTypeCtx::new(), &[]).unwrap();
        assert_eq!(evaluate(&e, &c).unwrap(), Output::Truth(1.0));
        let missing = ctx(LogicKind::Godel);
        assert_eq!(evaluate(&e, &missing), Err(EvalError::MissingSampler("x".into())));
    }

    #[test]
    fn root_with_network_and_arguments() {
        let spec = parse(
            "network f : Vec 2 -> Vec 2\n\
             let p : Real -> Bool = lam (eps : Real) . forall (i : Index 2) . f [1.0, 2.0] ! i <= eps",
        )
        .unwrap();
        let c = ctx(LogicKind::Dl2).with_network("f", DenseNetwork::identity(2));
        assert_eq!(truth_value(&spec, &c, &[Arg::Real(1.5)]).unwrap(), -0.5);
        assert_eq!(loss(&spec, &c, &[Arg::Real(3.0)]).unwrap(), 0.0);
        assert!(matches!(loss(&spec, &c, &[]), Err(EvalError::Arity { expected: 1, got: 0 })));
        let bad = ctx(LogicKind::Dl2).with_network("f", DenseNetwork::identity(3));
        assert!(matches!(loss(&spec, &bad, &[Arg::Real(1.0)]), Err(EvalError::NetworkShape { .. })));
    }

    #[test]
    fn trace_lists_nodes() {
        let c = ctx(LogicKind::Godel);
        let e = parse_expr("1.0 <= 2.0 and 3.0 <= 1.0", &NetworkTypeCtx::new(), &[]).unwrap();
        let (_, lines) = evaluate_traced(&e, &c, &[]).unwrap();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("1.0 <= 2.0 and 3.0 <= 1.0 = "), "{lines:?}");
        assert!(lines[1].starts_with("  1.0 <= 2.0 = "));
        assert!(lines[2].starts_with("  3.0 <= 1.0 = "));
    }

    #[test]
    fn bindings_to_args() {
        let params = vec![Binder::new("b", LdlType::Bool), Binder::new("v", LdlType::Vec(2))];
        let mut bs = BTreeMap::new();
        bs.insert("b".to_string(), Binding::Bool(true));
        bs.insert("v".to_string(), Binding::Vector(vec![1.0, 2.0]));
        let l = Logic::new(LogicKind::Stl);
        let args = args_from_bindings(&params, &bs, &l).unwrap();
        assert_eq!(args, vec![Arg::Truth(f64::INFINITY), Arg::Vec(vec![1.0, 2.0])]);
        bs.insert("v".to_string(), Binding::Vector(vec![1.0]));
        assert!(args_from_bindings(&params, &bs, &l).is_err());
    }
}
