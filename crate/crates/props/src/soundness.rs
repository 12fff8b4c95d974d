//! Soundness against classical logic on ground formulas: whenever a formula
//! evaluates to the logic's top value it must be classically true, and for
//! the fuzzy logics, bottom must mean classically false.

use ldl_core::ast::{BuiltinOp, Expr, LdlType, NetworkTypeCtx};
use ldl_core::classical::holds;
use ldl_core::eval::{evaluate, EvalError, Output, SemanticContext};
use ldl_core::logic::{Logic, LogicKind};
use ldl_core::parser::parse_expr;
use ldl_core::pretty::{format_real, pretty};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Property, PropertyVerdict, Verdict, Witness};

/// Constants appearing in generated formulas.
pub const GRID: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
pub const MAX_DEPTH: usize = 5;

/// Classical truth of a ground formula.
pub fn classical_eval(g: &Expr) -> Result<bool, EvalError> {
    holds(g, &SemanticContext::new(Logic::new(LogicKind::Godel)), &[])
}

/// A real-valued ground term.
#[derive(Clone, Debug)]
pub enum Term {
    Const(f64),
    Add(f64, f64),
    Mul(f64, f64),
    Neg(f64),
    /// Vector literal indexed by the quantified variable at this scope depth.
    Lookup(Vec<f64>, usize),
}

/// A ground formula, kept in this form so that it can be re-evaluated
/// independently of the main evaluator.
#[derive(Clone, Debug)]
pub enum Ground {
    Cmp(BuiltinOp, Term, Term),
    And(Box<Ground>, Box<Ground>),
    Or(Box<Ground>, Box<Ground>),
    Not(Box<Ground>),
    Implies(Box<Ground>, Box<Ground>),
    Quant { forall: bool, size: usize, body: Box<Ground> },
}

impl Term {
    fn value(&self, env: &[usize]) -> f64 {
        match self {
            Term::Const(a) => *a,
            Term::Add(a, b) => a + b,
            Term::Mul(a, b) => a * b,
            Term::Neg(a) => -a,
            Term::Lookup(v, depth) => v[env[*depth]],
        }
    }

    fn to_expr(&self) -> Expr {
        match self {
            Term::Const(a) => Expr::real(*a),
            Term::Add(a, b) => Expr::binop(BuiltinOp::Add, Expr::real(*a), Expr::real(*b)),
            Term::Mul(a, b) => Expr::binop(BuiltinOp::Mul, Expr::real(*a), Expr::real(*b)),
            Term::Neg(a) => Expr::unop(BuiltinOp::Neg, Expr::real(*a)),
            Term::Lookup(v, depth) => Expr::binop(
                BuiltinOp::Lookup,
                Expr::vec(v.iter().map(|x| Expr::real(*x)).collect()),
                Expr::free(format!("i{}", depth + 1)),
            ),
        }
    }
}

fn cmp_classical(op: BuiltinOp, a: f64, b: f64) -> bool {
    match op {
        BuiltinOp::Eq => a == b,
        BuiltinOp::Neq => a != b,
        BuiltinOp::Leq => a <= b,
        BuiltinOp::Geq => a >= b,
        BuiltinOp::Lt => a < b,
        _ => a > b,
    }
}

/// Product truth value carried together with its complement `1 - v`, so
/// that values within rounding of 1 are not collapsed onto it.
#[derive(Clone, Copy, Debug)]
struct Split {
    v: f64,
    u: f64,
}

impl Split {
    fn and(self, o: Split) -> Split {
        Split {
            v: self.v * o.v,
            u: self.u + o.u - self.u * o.u,
        }
    }

    fn not(self) -> Split {
        Split { v: self.u, u: self.v }
    }

    fn or(self, o: Split) -> Split {
        self.not().and(o.not()).not()
    }
}

impl Ground {
    pub fn to_expr(&self) -> Expr {
        self.expr_at(0)
    }

    fn expr_at(&self, depth: usize) -> Expr {
        let b = |op, x: &Ground, y: &Ground| Expr::binop(op, x.expr_at(depth), y.expr_at(depth));
        match self {
            Ground::Cmp(op, x, y) => Expr::binop(*op, x.to_expr(), y.to_expr()),
            Ground::And(x, y) => b(BuiltinOp::And, x, y),
            Ground::Or(x, y) => b(BuiltinOp::Or, x, y),
            Ground::Not(x) => Expr::unop(BuiltinOp::Not, x.expr_at(depth)),
            Ground::Implies(x, y) => b(BuiltinOp::Implies, x, y),
            Ground::Quant { forall, size, body } => {
                let name = format!("i{}", depth + 1);
                let body = body.expr_at(depth + 1);
                if *forall {
                    Expr::forall(&name, LdlType::Index(*size), body)
                } else {
                    Expr::exists(&name, LdlType::Index(*size), body)
                }
            }
        }
    }

    pub fn classical(&self) -> bool {
        self.classical_in(&mut Vec::new())
    }

    fn classical_in(&self, env: &mut Vec<usize>) -> bool {
        match self {
            Ground::Cmp(op, x, y) => cmp_classical(*op, x.value(env), y.value(env)),
            Ground::And(x, y) => x.classical_in(env) & y.classical_in(env),
            Ground::Or(x, y) => x.classical_in(env) | y.classical_in(env),
            Ground::Not(x) => !x.classical_in(env),
            Ground::Implies(x, y) => !x.classical_in(env) | y.classical_in(env),
            Ground::Quant { forall, size, body } => {
                let mut all = true;
                let mut any = false;
                for k in 0..*size {
                    env.push(k);
                    let c = body.classical_in(env);
                    env.pop();
                    all &= c;
                    any |= c;
                }
                if *forall {
                    all
                } else {
                    any
                }
            }
        }
    }

    /// Product semantics in complement-tracking arithmetic. Matches the
    /// evaluator up to rounding, but reaches exactly 1 (or 0) only when the
    /// real-number value does.
    fn product_split(&self, logic: &Logic, env: &mut Vec<usize>) -> Split {
        match self {
            Ground::Cmp(op, x, y) => {
                let (a, b) = (x.value(env), y.value(env));
                let eq = |a: f64, b: f64| {
                    let t = (a - b).abs().tanh();
                    Split { v: 1.0 - t, u: t }
                };
                let neq = |a: f64, b: f64| {
                    let i = if a == b { 1.0 } else { 0.0 };
                    Split { v: 1.0 - i, u: i }
                };
                let leq = |a: f64, b: f64| {
                    let t = if logic.leq_signed { (a - b).tanh().max(0.0) } else { (a - b).abs().tanh() };
                    Split { v: 1.0 - t, u: t }
                };
                match op {
                    BuiltinOp::Eq => eq(a, b),
                    BuiltinOp::Neq => neq(a, b),
                    BuiltinOp::Leq => leq(a, b),
                    BuiltinOp::Geq => leq(b, a),
                    BuiltinOp::Lt => leq(a, b).and(neq(a, b)),
                    _ => leq(b, a).and(neq(a, b)),
                }
            }
            Ground::And(x, y) => x.product_split(logic, env).and(y.product_split(logic, env)),
            Ground::Or(x, y) => x.product_split(logic, env).or(y.product_split(logic, env)),
            Ground::Not(x) => x.product_split(logic, env).not(),
            Ground::Implies(x, y) => x.product_split(logic, env).not().or(y.product_split(logic, env)),
            Ground::Quant { forall, size, body } => {
                let mut acc: Option<Split> = None;
                for k in 0..*size {
                    env.push(k);
                    let s = body.product_split(logic, env);
                    env.pop();
                    acc = Some(match acc {
                        None => s,
                        Some(a) if *forall => a.and(s),
                        Some(a) => a.or(s),
                    });
                }
                acc.expect("nonempty domain")
            }
        }
    }
}

/// Generator of ground formulas over the connectives a logic supports:
/// no implication for STL.
pub struct GroundGen<'r> {
    rng: &'r mut ChaCha8Rng,
    implication: bool,
}

impl<'r> GroundGen<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng, kind: LogicKind) -> Self {
        GroundGen {
            rng,
            implication: kind != LogicKind::Stl,
        }
    }

    fn constant(&mut self) -> f64 {
        *GRID.choose(self.rng).expect("nonempty")
    }

    fn real(&mut self, scope: &[usize]) -> Term {
        match self.rng.random_range(0..6) {
            0 => Term::Add(self.constant(), self.constant()),
            1 => Term::Mul(self.constant(), self.constant()),
            2 => Term::Neg(self.constant()),
            3 if !scope.is_empty() => {
                let depth = self.rng.random_range(0..scope.len());
                Term::Lookup((0..scope[depth]).map(|_| self.constant()).collect(), depth)
            }
            _ => Term::Const(self.constant()),
        }
    }

    fn atom(&mut self, scope: &[usize]) -> Ground {
        let op = *BuiltinOp::COMPARISONS.choose(self.rng).expect("nonempty");
        Ground::Cmp(op, self.real(scope), self.real(scope))
    }

    pub fn formula(&mut self) -> Ground {
        self.node(MAX_DEPTH, &mut Vec::new())
    }

    fn node(&mut self, depth: usize, scope: &mut Vec<usize>) -> Ground {
        if depth == 0 || self.rng.random_bool(0.25) {
            return self.atom(scope);
        }
        let d = depth - 1;
        match self.rng.random_range(0..7) {
            0 | 1 => Ground::And(Box::new(self.node(d, scope)), Box::new(self.node(d, scope))),
            2 | 3 => Ground::Or(Box::new(self.node(d, scope)), Box::new(self.node(d, scope))),
            4 => Ground::Not(Box::new(self.node(d, scope))),
            5 if self.implication => Ground::Implies(Box::new(self.node(d, scope)), Box::new(self.node(d, scope))),
            _ => {
                let size = self.rng.random_range(2..=3);
                scope.push(size);
                let body = Box::new(self.node(d, scope));
                scope.pop();
                Ground::Quant {
                    forall: self.rng.random_bool(0.5),
                    size,
                    body,
                }
            }
        }
    }
}

fn truth(e: &Expr, logic: &Logic) -> Option<f64> {
    match evaluate(e, &SemanticContext::new(*logic)) {
        Ok(Output::Truth(t)) => Some(t),
        _ => None,
    }
}

/// Whether value `t` of a formula with classical truth `c` breaks soundness.
fn violates(logic: &Logic, t: f64, c: bool) -> bool {
    (t == logic.top() && !c) || (logic.kind.is_fuzzy() && t == logic.bottom() && c)
}

/// Enumerates implications `(a ⋈ b) => (c ⋈ d)` between comparison atoms
/// over the constant grid, looking for one that evaluates to top while it
/// is classically false. Logics without a primitive implication are skipped.
pub fn directed_search(logic: &Logic) -> Option<Witness> {
    if !logic.kind.is_fuzzy() {
        return None;
    }
    let mut atoms = Vec::new();
    for &a in &GRID {
        for &b in &GRID {
            for op in BuiltinOp::COMPARISONS {
                let text = format!("{} {} {}", format_real(a), op.symbol(), format_real(b));
                let value = logic.compare(op, &a, &b);
                let classical = match op {
                    BuiltinOp::Eq => a == b,
                    BuiltinOp::Neq => a != b,
                    BuiltinOp::Leq => a <= b,
                    BuiltinOp::Geq => a >= b,
                    BuiltinOp::Lt => a < b,
                    _ => a > b,
                };
                atoms.push((text, value, classical));
            }
        }
    }
    for (ta, va, ca) in &atoms {
        if !*ca {
            continue;
        }
        for (tb, vb, cb) in &atoms {
            if *cb {
                continue;
            }
            if logic.implies(va, vb).ok() == Some(logic.top()) {
                let w = Witness::Unsound {
                    formula: format!("({ta}) => ({tb})"),
                };
                // confirm through the evaluator
                if w.replay(logic) == 1.0 {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// Whether a violation seen in floating point survives exact-complement
/// re-evaluation. Only Product needs this: its disjunction and implication
/// round values within 2^-53 of 1 up to exactly 1.
fn confirmed(logic: &Logic, g: &Ground, c: bool) -> bool {
    if logic.kind != LogicKind::Product {
        return true;
    }
    let s = g.product_split(logic, &mut Vec::new());
    (s.u == 0.0 && !c) || (s.v == 0.0 && c)
}

pub fn check_soundness(logic: &Logic, trials: usize, seed: u64) -> PropertyVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tops = 0usize;
    let mut violations = 0usize;
    let mut rounding = 0usize;
    let mut first: Option<Witness> = None;
    let nets = NetworkTypeCtx::new();
    for _ in 0..trials {
        let g = GroundGen::new(&mut rng, logic.kind).formula();
        let e = g.to_expr();
        let Some(t) = truth(&e, logic) else {
            continue;
        };
        let c = g.classical();
        tops += usize::from(t == logic.top());
        if !violates(logic, t, c) {
            continue;
        }
        if !confirmed(logic, &g, c) {
            rounding += 1;
            continue;
        }
        violations += 1;
        if first.is_none() {
            let formula = pretty(&e);
            debug_assert!(parse_expr(&formula, &nets, &[]).is_ok());
            first = Some(Witness::Unsound { formula });
        }
    }
    let directed = directed_search(logic);
    let mut note = format!("{trials} formulas, {tops} evaluated to top, {violations} violations");
    if rounding > 0 {
        note.push_str(&format!(", {rounding} rounding artefacts discarded"));
    }
    if logic.kind.is_fuzzy() {
        note.push_str(match &directed {
            Some(_) => "; directed implication search found a counterexample",
            None => "; directed implication search found nothing",
        });
    }
    let witness = first.or(directed);
    match witness {
        Some(w) => PropertyVerdict::fails(logic, Property::Soundness, trials, 0.0, w, 1.0),
        None if tops == 0 => PropertyVerdict {
            verdict: Verdict::Vacuous,
            ..PropertyVerdict::holds(logic, Property::Soundness, trials, 0.0)
        },
        None => PropertyVerdict::holds(logic, Property::Soundness, trials, 0.0),
    }
    .with_note(note)
}
