//! Compilation of a property to a logic-free computation graph.
//!
//! Compiling runs the generic evaluator with a recording scalar, so every
//! connective is lowered to the same primitive operations that direct
//! evaluation performs. Lambdas, lets and finite quantifiers disappear;
//! infinite quantifiers become `reduce` nodes over a nested scope whose
//! `sample` nodes are filled in by the interpreter.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ast::{Binder, Expr, LdlType, NetworkTypeCtx, Quantifier};
use crate::eval::{prepare, Arg, Backend, Env, EvalError, Evaluator, SemanticContext, Value};
use crate::fmt::{g17, parse_g};
use crate::logic::Logic;
use crate::parser::SpecFile;
use crate::real::{and_stl_kernel, prim, Real};
use crate::sampling::{extremize, Extremum};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("parameter `{0}` has an Index type, which graphs do not support as an input")]
    IndexInput(String),
    #[error("the compiled expression is not a property returning Bool")]
    NotBoolean,
    #[error("graph text, line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphOp {
    Input { name: String, component: usize },
    Const(f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Exp(usize),
    Tanh(usize),
    Abs(usize),
    Powf(usize, f64),
    Max(usize, usize),
    Min(usize, usize),
    Mul0(usize, usize),
    EqInd(usize, usize),
    AndStl { nu: f64, args: Vec<usize> },
    NetCall { network: String, inputs: Vec<usize>, outputs: usize },
    NetOut { call: usize, k: usize },
    Sample { scope: usize, component: usize },
    Reduce { scope: usize, ext: Extremum, var: String, body: usize },
}

impl GraphOp {
    pub fn name(&self) -> &'static str {
        match self {
            GraphOp::Input { .. } => "input",
            GraphOp::Const(_) => "const",
            GraphOp::Add(..) => "add",
            GraphOp::Sub(..) => "sub",
            GraphOp::Mul(..) => "mul",
            GraphOp::Div(..) => "div",
            GraphOp::Neg(_) => "neg",
            GraphOp::Exp(_) => "exp",
            GraphOp::Tanh(_) => "tanh",
            GraphOp::Abs(_) => "abs",
            GraphOp::Powf(..) => "powf",
            GraphOp::Max(..) => "max",
            GraphOp::Min(..) => "min",
            GraphOp::Mul0(..) => "mul0",
            GraphOp::EqInd(..) => "eq_ind",
            GraphOp::AndStl { .. } => "and_stl",
            GraphOp::NetCall { .. } => "netcall",
            GraphOp::NetOut { .. } => "netout",
            GraphOp::Sample { .. } => "sample",
            GraphOp::Reduce { .. } => "reduce",
        }
    }

    fn operands(&self) -> Vec<usize> {
        match self {
            GraphOp::Input { .. } | GraphOp::Const(_) | GraphOp::Sample { .. } => vec![],
            GraphOp::Add(a, b)
            | GraphOp::Sub(a, b)
            | GraphOp::Mul(a, b)
            | GraphOp::Div(a, b)
            | GraphOp::Max(a, b)
            | GraphOp::Min(a, b)
            | GraphOp::Mul0(a, b)
            | GraphOp::EqInd(a, b) => vec![*a, *b],
            GraphOp::Neg(a) | GraphOp::Exp(a) | GraphOp::Tanh(a) | GraphOp::Abs(a) | GraphOp::Powf(a, _) => vec![*a],
            GraphOp::AndStl { args, .. } => args.clone(),
            GraphOp::NetCall { inputs, .. } => inputs.clone(),
            GraphOp::NetOut { call, .. } => vec![*call],
            GraphOp::Reduce { .. } => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub op: GraphOp,
    pub scope: usize,
}

/// Scope 0 is the top level; every other scope belongs to one `reduce`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphScope {
    pub parent: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprGraph {
    pub nodes: Vec<GraphNode>,
    pub scopes: Vec<GraphScope>,
    pub inputs: Vec<Binder>,
    pub output: usize,
}

// ---------------------------------------------------------------------------
// recording

#[derive(Default)]
struct Builder {
    nodes: Vec<GraphNode>,
    scopes: Vec<GraphScope>,
    open: Vec<usize>,
}

thread_local! {
    static BUILDER: RefCell<Option<Builder>> = const { RefCell::new(None) };
}

fn with_builder<T>(f: impl FnOnce(&mut Builder) -> T) -> T {
    BUILDER.with(|b| f(b.borrow_mut().as_mut().expect("graph scalars are only used while compiling")))
}

impl Builder {
    fn push(&mut self, op: GraphOp, scope: usize) -> usize {
        self.nodes.push(GraphNode { op, scope });
        self.nodes.len() - 1
    }

    /// Deepest scope among the operands; scope 0 for none.
    fn scope_of(&self, operands: &[usize]) -> usize {
        operands
            .iter()
            .map(|&o| self.nodes[o].scope)
            .max_by_key(|&s| self.scopes[s].depth)
            .unwrap_or(0)
    }

    fn node(&mut self, op: GraphOp) -> usize {
        let scope = self.scope_of(&op.operands());
        self.push(op, scope)
    }
}

/// A scalar that records the operations applied to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphReal(pub usize);

fn rec(op: GraphOp) -> GraphReal {
    GraphReal(with_builder(|b| b.node(op)))
}

impl Real for GraphReal {
    fn cst(v: f64) -> Self {
        rec(GraphOp::Const(v))
    }
    fn add(&self, o: &Self) -> Self {
        rec(GraphOp::Add(self.0, o.0))
    }
    fn sub(&self, o: &Self) -> Self {
        rec(GraphOp::Sub(self.0, o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        rec(GraphOp::Mul(self.0, o.0))
    }
    fn div(&self, o: &Self) -> Self {
        rec(GraphOp::Div(self.0, o.0))
    }
    fn neg(&self) -> Self {
        rec(GraphOp::Neg(self.0))
    }
    fn exp(&self) -> Self {
        rec(GraphOp::Exp(self.0))
    }
    fn tanh(&self) -> Self {
        rec(GraphOp::Tanh(self.0))
    }
    fn abs(&self) -> Self {
        rec(GraphOp::Abs(self.0))
    }
    fn powf(&self, p: f64) -> Self {
        rec(GraphOp::Powf(self.0, p))
    }
    fn max(&self, o: &Self) -> Self {
        rec(GraphOp::Max(self.0, o.0))
    }
    fn min(&self, o: &Self) -> Self {
        rec(GraphOp::Min(self.0, o.0))
    }
    fn mul0(&self, o: &Self) -> Self {
        rec(GraphOp::Mul0(self.0, o.0))
    }
    fn eq_ind(&self, o: &Self) -> Self {
        rec(GraphOp::EqInd(self.0, o.0))
    }
    fn and_stl(nu: f64, args: &[Self]) -> Self {
        rec(GraphOp::AndStl {
            nu,
            args: args.iter().map(|a| a.0).collect(),
        })
    }
}

struct GraphBackend;

impl Backend for GraphBackend {
    type R = GraphReal;

    fn network(&mut self, name: &str, input: &[GraphReal], output_dim: usize) -> Result<Vec<GraphReal>, EvalError> {
        let call = rec(GraphOp::NetCall {
            network: name.to_string(),
            inputs: input.iter().map(|x| x.0).collect(),
            outputs: output_dim,
        });
        Ok((0..output_dim).map(|k| rec(GraphOp::NetOut { call: call.0, k })).collect())
    }

    fn infinite<'e>(
        ev: &mut Evaluator<'e, Self>,
        q: Quantifier,
        binder: &'e Binder,
        body: &'e Expr,
        env: &Env<'e, GraphReal>,
    ) -> Result<GraphReal, EvalError> {
        let dim = binder
            .ty
            .real_dim()
            .ok_or_else(|| EvalError::Internal(format!("`{}` is not real-valued", binder.name)))?;
        let (parent, scope, samples) = with_builder(|b| {
            let parent = *b.open.last().unwrap_or(&0);
            let depth = b.scopes[parent].depth + 1;
            b.scopes.push(GraphScope { parent, depth });
            let scope = b.scopes.len() - 1;
            b.open.push(scope);
            let samples: Vec<GraphReal> = (0..dim)
                .map(|component| GraphReal(b.push(GraphOp::Sample { scope, component }, scope)))
                .collect();
            (parent, scope, samples)
        });
        let point = match binder.ty {
            LdlType::Real => Value::Real(samples[0]),
            _ => Value::Vec(samples),
        };
        let body_value = ev.truth(body, &env.push(point));
        with_builder(|b| b.open.pop());
        let body_value = body_value?;
        let ext = match q {
            Quantifier::Forall => Extremum::Min,
            Quantifier::Exists => Extremum::Max,
        };
        let op = GraphOp::Reduce {
            scope,
            ext,
            var: binder.name.clone(),
            body: body_value.0,
        };
        Ok(GraphReal(with_builder(|b| b.push(op, parent))))
    }
}

struct BuilderGuard;

impl Drop for BuilderGuard {
    fn drop(&mut self) {
        BUILDER.with(|b| *b.borrow_mut() = None);
    }
}

/// Compiles a Boolean-valued function (or a closed Boolean expression) to a
/// graph whose inputs are the function's parameters.
pub fn compile_expr(e: &Expr, logic: &Logic, net_dims: &NetworkTypeCtx) -> Result<ExprGraph, GraphError> {
    let prepared = prepare(e, logic)?;
    BUILDER.with(|b| {
        *b.borrow_mut() = Some(Builder {
            scopes: vec![GraphScope { parent: 0, depth: 0 }],
            ..Builder::default()
        })
    });
    let _guard = BuilderGuard;
    let mut ev = Evaluator::new(GraphBackend, *logic, net_dims.clone());
    let mut v = ev.eval(&prepared, &Env::empty())?;
    let mut inputs = Vec::new();
    while let Value::Closure { binder, .. } = &v {
        let binder: Binder = (*binder).clone();
        let arg = match &binder.ty {
            LdlType::Real | LdlType::Bool => Value::Real(GraphReal(with_builder(|b| {
                b.push(
                    GraphOp::Input {
                        name: binder.name.clone(),
                        component: 0,
                    },
                    0,
                )
            }))),
            LdlType::Vec(n) => Value::Vec(
                (0..*n)
                    .map(|component| {
                        GraphReal(with_builder(|b| {
                            b.push(
                                GraphOp::Input {
                                    name: binder.name.clone(),
                                    component,
                                },
                                0,
                            )
                        }))
                    })
                    .collect(),
            ),
            LdlType::Index(_) => return Err(GraphError::IndexInput(binder.name.clone())),
            LdlType::Fun(..) => return Err(GraphError::NotBoolean),
        };
        let arg = match (arg, &binder.ty) {
            (Value::Real(r), LdlType::Bool) => Value::Truth(r),
            (a, _) => a,
        };
        inputs.push(binder);
        v = ev.apply(v, arg)?;
    }
    let Value::Truth(out) = v else {
        return Err(GraphError::NotBoolean);
    };
    let b = BUILDER.with(|b| b.borrow_mut().take()).expect("builder installed above");
    Ok(ExprGraph {
        nodes: b.nodes,
        scopes: b.scopes,
        inputs,
        output: out.0,
    })
}

/// Compiles the root property of a spec.
pub fn compile(spec: &SpecFile, logic: &Logic) -> Result<ExprGraph, GraphError> {
    compile_expr(&spec.root_expr(), logic, &spec.network_ctx())
}

// ---------------------------------------------------------------------------
// interpretation

impl ExprGraph {
    /// Node counts per operation name.
    pub fn op_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for n in &self.nodes {
            *m.entry(n.op.name()).or_insert(0) += 1;
        }
        m
    }

    fn scope_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.scopes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            members[n.scope].push(i);
        }
        members
    }

    /// Truth value of the graph on `args`, which must match [`Self::inputs`].
    pub fn evaluate(&self, ctx: &SemanticContext, args: &[Arg]) -> Result<f64, EvalError> {
        if args.len() != self.inputs.len() {
            return Err(EvalError::Arity {
                expected: self.inputs.len(),
                got: args.len(),
            });
        }
        for (b, a) in self.inputs.iter().zip(args) {
            a.check(&b.ty).map_err(|message| EvalError::BadArgument {
                name: b.name.clone(),
                message,
            })?;
        }
        let by_name: BTreeMap<&str, &Arg> = self.inputs.iter().map(|b| b.name.as_str()).zip(args).collect();
        let members = self.scope_members();
        let mut values = vec![f64::NAN; self.nodes.len()];
        let mut net_outputs: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        self.run_scope(0, &members, ctx, &by_name, &mut values, &mut net_outputs)?;
        Ok(values[self.output])
    }

    fn run_scope(
        &self,
        scope: usize,
        members: &[Vec<usize>],
        ctx: &SemanticContext,
        args: &BTreeMap<&str, &Arg>,
        values: &mut Vec<f64>,
        net_outputs: &mut BTreeMap<usize, Vec<f64>>,
    ) -> Result<(), EvalError> {
        for &i in &members[scope] {
            let v = |k: usize| values[k];
            let out = match &self.nodes[i].op {
                GraphOp::Input { name, component } => match args.get(name.as_str()) {
                    Some(Arg::Real(x)) | Some(Arg::Truth(x)) => *x,
                    Some(Arg::Vec(xs)) => xs[*component],
                    _ => return Err(EvalError::Unbound(name.clone())),
                },
                GraphOp::Const(c) => *c,
                GraphOp::Add(a, b) => v(*a) + v(*b),
                GraphOp::Sub(a, b) => v(*a) - v(*b),
                GraphOp::Mul(a, b) => v(*a) * v(*b),
                GraphOp::Div(a, b) => v(*a) / v(*b),
                GraphOp::Neg(a) => -v(*a),
                GraphOp::Exp(a) => v(*a).exp(),
                GraphOp::Tanh(a) => v(*a).tanh(),
                GraphOp::Abs(a) => v(*a).abs(),
                GraphOp::Powf(a, p) => v(*a).powf(*p),
                GraphOp::Max(a, b) => prim::max(v(*a), v(*b)),
                GraphOp::Min(a, b) => prim::min(v(*a), v(*b)),
                GraphOp::Mul0(a, b) => prim::mul0(v(*a), v(*b)),
                GraphOp::EqInd(a, b) => prim::eq_ind(v(*a), v(*b)),
                GraphOp::AndStl { nu, args } => {
                    let xs: Vec<f64> = args.iter().map(|&k| values[k]).collect();
                    and_stl_kernel(*nu, &xs)
                }
                GraphOp::NetCall { network, inputs, outputs } => {
                    let net = ctx
                        .networks
                        .get(network)
                        .ok_or_else(|| EvalError::MissingNetwork(network.clone()))?;
                    if net.input_dim() != inputs.len() || net.output_dim() != *outputs {
                        return Err(EvalError::NetworkShape {
                            name: network.clone(),
                            declared_in: inputs.len(),
                            declared_out: *outputs,
                            actual_in: net.input_dim(),
                            actual_out: net.output_dim(),
                        });
                    }
                    let x: Vec<f64> = inputs.iter().map(|&k| values[k]).collect();
                    let y = net.forward(&x).map_err(|e| EvalError::Internal(e.to_string()))?;
                    net_outputs.insert(i, y);
                    f64::NAN
                }
                GraphOp::NetOut { call, k } => net_outputs[call][*k],
                GraphOp::Sample { .. } => continue,
                GraphOp::Reduce { scope: child, ext, var, body } => {
                    let dist = ctx
                        .samplers
                        .get(var)
                        .ok_or_else(|| EvalError::MissingSampler(var.clone()))?;
                    let sample_ids: Vec<usize> = members[*child]
                        .iter()
                        .copied()
                        .filter(|&k| matches!(self.nodes[k].op, GraphOp::Sample { .. }))
                        .collect();
                    if dist.dim() != sample_ids.len() {
                        return Err(EvalError::SamplerDimension {
                            name: var.clone(),
                            expected: sample_ids.len(),
                            got: dist.dim(),
                        });
                    }
                    let res = extremize(dist, &ctx.sampling, var, *ext, |p| {
                        for &k in &sample_ids {
                            if let GraphOp::Sample { component, .. } = self.nodes[k].op {
                                values[k] = p[component];
                            }
                        }
                        self.run_scope(*child, members, ctx, args, values, net_outputs)?;
                        Ok::<_, EvalError>(values[*body])
                    })?;
                    res.value
                }
            };
            values[i] = out;
        }
        Ok(())
    }

    // -----------------------------------------------------------------------
    // text format

    /// Line-oriented text form; [`ExprGraph::from_text`] reads it back exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::from("ldl-graph 1\n");
        for b in &self.inputs {
            let _ = writeln!(s, "input {} : {}", b.name, b.ty);
        }
        for (i, sc) in self.scopes.iter().enumerate().skip(1) {
            let _ = writeln!(s, "scope {i} {}", sc.parent);
        }
        let ids = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = write!(s, "{i} @{} {}", n.scope, n.op.name());
            let _ = match &n.op {
                GraphOp::Input { name, component } => write!(s, " {name} {component}"),
                GraphOp::Const(c) => write!(s, " {}", g17(*c)),
                GraphOp::Powf(a, p) => write!(s, " {a} {}", g17(*p)),
                GraphOp::AndStl { nu, args } => write!(s, " {} {}", g17(*nu), ids(args)),
                GraphOp::NetCall { network, inputs, outputs } => write!(s, " {network} {outputs} {}", ids(inputs)),
                GraphOp::NetOut { call, k } => write!(s, " {call} {k}"),
                GraphOp::Sample { scope, component } => write!(s, " {scope} {component}"),
                GraphOp::Reduce { scope, ext, var, body } => {
                    let e = if *ext == Extremum::Min { "min" } else { "max" };
                    write!(s, " {scope} {e} {var} {body}")
                }
                other => write!(s, " {}", ids(&other.operands())),
            };
            s.push('\n');
        }
        let _ = writeln!(s, "output {}", self.output);
        s
    }

    pub fn from_text(text: &str) -> Result<ExprGraph, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, message: &str| GraphError::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        match lines.next() {
            Some((_, l)) if l.trim() == "ldl-graph 1" => {}
            _ => return Err(err(0, "missing `ldl-graph 1` header")),
        }
        let mut g = ExprGraph {
            nodes: Vec::new(),
            scopes: vec![GraphScope { parent: 0, depth: 0 }],
            inputs: Vec::new(),
            output: usize::MAX,
        };
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |k: usize| -> Result<usize, GraphError> {
                toks.get(k)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(ln, &format!("expected an integer in field {}", k + 1)))
            };
            let real = |k: usize| -> Result<f64, GraphError> {
                toks.get(k)
                    .and_then(|t| parse_g(t))
                    .ok_or_else(|| err(ln, &format!("expected a number in field {}", k + 1)))
            };
            let word = |k: usize| -> Result<String, GraphError> {
                toks.get(k)
                    .map(|t| t.to_string())
                    .ok_or_else(|| err(ln, "missing field"))
            };
            match toks[0] {
                "input" => {
                    let (name, ty) = line["input".len()..]
                        .split_once(':')
                        .ok_or_else(|| err(ln, "expected `input name : type`"))?;
                    let ty = crate::parser::parse_type(ty.trim()).map_err(|e| err(ln, &e.to_string()))?;
                    g.inputs.push(Binder::new(name.trim(), ty));
                }
                "scope" => {
                    let parent = num(2)?;
                    if num(1)? != g.scopes.len() || parent >= g.scopes.len() {
                        return Err(err(ln, "scopes must be numbered consecutively after their parents"));
                    }
                    let depth = g.scopes[parent].depth + 1;
                    g.scopes.push(GraphScope { parent, depth });
                }
                "output" => g.output = num(1)?,
                _ => {
                    if num(0)? != g.nodes.len() {
                        return Err(err(ln, "nodes must be numbered consecutively"));
                    }
                    let scope = toks
                        .get(1)
                        .and_then(|t| t.strip_prefix('@'))
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(ln, "expected `@scope`"))?;
                    let rest = |from: usize| -> Result<Vec<usize>, GraphError> { (from..toks.len()).map(num).collect() };
                    let op = match toks.get(2).copied().unwrap_or("") {
                        "input" => GraphOp::Input {
                            name: word(3)?,
                            component: num(4)?,
                        },
                        "const" => GraphOp::Const(real(3)?),
                        "add" => GraphOp::Add(num(3)?, num(4)?),
                        "sub" => GraphOp::Sub(num(3)?, num(4)?),
                        "mul" => GraphOp::Mul(num(3)?, num(4)?),
                        "div" => GraphOp::Div(num(3)?, num(4)?),
                        "neg" => GraphOp::Neg(num(3)?),
                        "exp" => GraphOp::Exp(num(3)?),
                        "tanh" => GraphOp::Tanh(num(3)?),
                        "abs" => GraphOp::Abs(num(3)?),
                        "powf" => GraphOp::Powf(num(3)?, real(4)?),
                        "max" => GraphOp::Max(num(3)?, num(4)?),
                        "min" => GraphOp::Min(num(3)?, num(4)?),
                        "mul0" => GraphOp::Mul0(num(3)?, num(4)?),
                        "eq_ind" => GraphOp::EqInd(num(3)?, num(4)?),
                        "and_stl" => GraphOp::AndStl {
                            nu: real(3)?,
                            args: rest(4)?,
                        },
                        "netcall" => GraphOp::NetCall {
                            network: word(3)?,
                            outputs: num(4)?,
                            inputs: rest(5)?,
                        },
                        "netout" => GraphOp::NetOut {
                            call: num(3)?,
                            k: num(4)?,
                        },
                        "sample" => GraphOp::Sample {
                            scope: num(3)?,
                            component: num(4)?,
                        },
                        "reduce" => GraphOp::Reduce {
                            scope: num(3)?,
                            ext: match toks.get(4).copied() {
                                Some("min") => Extremum::Min,
                                Some("max") => Extremum::Max,
                                _ => return Err(err(ln, "expected `min` or `max`")),
                            },
                            var: word(5)?,
                            body: num(6)?,
                        },
                        other => return Err(err(ln, &format!("unknown operation `{other}`"))),
                    };
                    if scope >= g.scopes.len() {
                        return Err(err(ln, "unknown scope"));
                    }
                    if op.operands().iter().any(|&o| o >= g.nodes.len()) {
                        return Err(err(ln, "operand refers to a later node"));
                    }
                    g.nodes.push(GraphNode { op, scope });
                }
            }
        }
        if g.output >= g.nodes.len() {
            return Err(err(0, "missing or invalid `output` line"));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{truth_value, SemanticContext};
    use crate::logic::LogicKind;
    use crate::net::DenseNetwork;
    use crate::parser::parse;
    use crate::sampling::{Distribution, SamplingConfig};

    const SRC: &str = "network f : Vec 2 -> Vec 2\n\
        let p : Real -> Vec 2 -> Bool = lam (eps : Real) (c : Vec 2) .\n\
          forall (x : Vec 2) . (exists (i : Index 2) . x ! i <= c ! i + eps) => f x ! 0 >= -eps and not (f x ! 1 == 9.0)";

    fn ctx(kind: LogicKind) -> SemanticContext {
        SemanticContext::new(Logic::new(kind))
            .with_network("f", DenseNetwork::identity(2))
            .with_sampler("x", Distribution::uniform_cube(2, -1.0, 1.0))
            .with_sampling(SamplingConfig::new(16, 4, 3))
    }

    #[test]
    fn compiled_graph_matches_direct_evaluation() {
        let spec = parse(SRC).unwrap();
        let args = [Arg::Real(0.25), Arg::Vec(vec![0.1, -0.3])];
        for kind in LogicKind::ALL {
            let c = ctx(kind);
            let direct = truth_value(&spec, &c, &args).unwrap();
            let g = compile(&spec, &c.logic).unwrap();
            let via_graph = g.evaluate(&c, &args).unwrap();
            assert_eq!(direct.to_bits(), via_graph.to_bits(), "{kind}");
            let back = ExprGraph::from_text(&g.to_text()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn graphs_have_no_logic_nodes() {
        let spec = parse(SRC).unwrap();
        let g = compile(&spec, &Logic::new(LogicKind::Godel)).unwrap();
        let counts = g.op_counts();
        assert!(counts.contains_key("min") && counts.contains_key("max") && counts.contains_key("tanh"));
        assert_eq!(counts["reduce"], 1);
        assert_eq!(counts["input"], 3);
    }

    #[test]
    fn index_inputs_rejected() {
        let spec = parse("let p : Index 3 -> Bool = lam (i : Index 3) . [1.0, 2.0, 3.0] ! i <= 2.0").unwrap();
        assert_eq!(
            compile(&spec, &Logic::new(LogicKind::Godel)),
            Err(GraphError::IndexInput("i".into()))
        );
    }

    #[test]
    fn bad_text_rejected() {
        assert!(ExprGraph::from_text("nonsense").is_err());
        assert!(ExprGraph::from_text("ldl-graph 1\n0 @0 add 1 2\noutput 0").is_err());
    }
}
