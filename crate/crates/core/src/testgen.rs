//! Random generation of closed, well-typed expressions, for fuzzing the
//! typechecker, printer, evaluator and compiler against each other.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::ast::{BuiltinOp, Expr, LdlType, Quantifier};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_dim: usize,
    /// Allow quantifiers over `Real` (binder `r`) and `Vec 2` (binder `v`).
    pub infinite_quantifiers: bool,
    /// A network `(name, input, output)` that terms may call.
    pub network: Option<(String, usize, usize)>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_dim: 3,
            infinite_quantifiers: false,
            network: None,
        }
    }
}

/// Binder names used for infinite quantifiers, so a context can provide
/// samplers for them.
pub const REAL_SAMPLED: &str = "r";
pub const VEC_SAMPLED: &str = "v";

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    scope: Vec<(String, LdlType)>,
    counter: usize,
}

/// A random simple type.
pub fn gen_simple_type(rng: &mut impl Rng, cfg: &GenConfig) -> LdlType {
    match rng.random_range(0..4) {
        0 => LdlType::Bool,
        1 => LdlType::Real,
        2 => LdlType::Vec(rng.random_range(1..=cfg.max_dim)),
        _ => LdlType::Index(rng.random_range(1..=cfg.max_dim)),
    }
}

/// A random closed expression of simple type `ty`.
pub fn gen_term(rng: &mut impl Rng, ty: &LdlType, cfg: &GenConfig) -> Expr {
    let mut g = Gen {
        rng,
        cfg,
        scope: Vec::new(),
        counter: 0,
    };
    g.term(ty, cfg.max_depth)
}

/// A random closed function of type `params -> Bool`, as nested lambdas.
pub fn gen_property(rng: &mut impl Rng, params: &[LdlType], cfg: &GenConfig) -> Expr {
    let mut g = Gen {
        rng,
        cfg,
        scope: Vec::new(),
        counter: 0,
    };
    let names: Vec<String> = params.iter().map(|_| g.fresh()).collect();
    for (n, t) in names.iter().zip(params) {
        g.scope.push((n.clone(), t.clone()));
    }
    let mut body = g.term(&LdlType::Bool, cfg.max_depth);
    for (n, t) in names.iter().zip(params).rev() {
        body = Expr::lam(n, t.clone(), body);
    }
    body
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("a{}", self.counter)
    }

    fn var_of(&mut self, ty: &LdlType) -> Option<Expr> {
        let candidates: Vec<&(String, LdlType)> = self.scope.iter().filter(|(_, t)| t == ty).collect();
        candidates.choose(self.rng).map(|(n, _)| Expr::free(n.clone()))
    }

    fn real_lit(&mut self) -> Expr {
        let v = self.rng.random_range(-8i32..=8) as f64 * 0.5;
        Expr::real(v)
    }

    /// Runs `body` with `name : ty` in scope.
    fn with_var<T>(&mut self, name: &str, ty: &LdlType, body: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name.to_string(), ty.clone()));
        let out = body(self);
        self.scope.pop();
        out
    }

    fn term(&mut self, ty: &LdlType, depth: usize) -> Expr {
        if depth == 0 || self.rng.random_bool(0.2) {
            return self.leaf(ty);
        }
        let d = depth - 1;
        // binding forms available at every type
        match self.rng.random_range(0..10) {
            0 => {
                let bty = gen_simple_type(self.rng, self.cfg);
                let bound = self.term(&bty, d);
                let name = self.fresh();
                let body = self.with_var(&name, &bty, |g| g.term(ty, d));
                return Expr::let_in(&name, bty, bound, body);
            }
            1 => {
                let pty = gen_simple_type(self.rng, self.cfg);
                let name = self.fresh();
                let body = self.with_var(&name, &pty, |g| g.term(ty, d));
                let arg = self.term(&pty, d);
                return Expr::app(Expr::lam(&name, pty, body), arg);
            }
            _ => {}
        }
        match ty {
            LdlType::Bool => self.bool_term(d),
            LdlType::Real => match self.rng.random_range(0..5) {
                0 => Expr::binop(BuiltinOp::Add, self.term(ty, d), self.term(ty, d)),
                1 => Expr::binop(BuiltinOp::Mul, self.term(ty, d), self.term(ty, d)),
                2 => Expr::unop(BuiltinOp::Neg, self.term(ty, d)),
                _ => {
                    let n = self.rng.random_range(1..=self.cfg.max_dim);
                    let v = self.term(&LdlType::Vec(n), d);
                    let i = self.term(&LdlType::Index(n), d);
                    Expr::binop(BuiltinOp::Lookup, v, i)
                }
            },
            LdlType::Vec(n) => match &self.cfg.network {
                Some((name, din, dout)) if dout == n && self.rng.random_bool(0.4) => {
                    let (name, din) = (name.clone(), *din);
                    Expr::app(Expr::network(name), self.term(&LdlType::Vec(din), d))
                }
                _ => Expr::vec((0..*n).map(|_| self.term(&LdlType::Real, d)).collect()),
            },
            LdlType::Index(_) | LdlType::Fun(..) => self.leaf(ty),
        }
    }

    fn bool_term(&mut self, d: usize) -> Expr {
        use BuiltinOp::*;
        let b = LdlType::Bool;
        match self.rng.random_range(0..9) {
            0 | 1 => {
                let op = *BuiltinOp::COMPARISONS.choose(self.rng).expect("nonempty");
                Expr::binop(op, self.term(&LdlType::Real, d), self.term(&LdlType::Real, d))
            }
            2 => Expr::binop(And, self.term(&b, d), self.term(&b, d)),
            3 => Expr::binop(Or, self.term(&b, d), self.term(&b, d)),
            4 => Expr::binop(Implies, self.term(&b, d), self.term(&b, d)),
            5 => Expr::unop(Not, self.term(&b, d)),
            _ => {
                let q = if self.rng.random_bool(0.5) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let (name, qty) = match self.rng.random_range(0..4) {
                    0 if self.cfg.infinite_quantifiers => (REAL_SAMPLED.to_string(), LdlType::Real),
                    1 if self.cfg.infinite_quantifiers => (VEC_SAMPLED.to_string(), LdlType::Vec(2)),
                    2 => (self.fresh(), LdlType::Bool),
                    _ => (self.fresh(), LdlType::Index(self.rng.random_range(1..=self.cfg.max_dim))),
                };
                let body = self.with_var(&name, &qty, |g| g.term(&b, d));
                Expr::quant(q, &name, qty, body)
            }
        }
    }

    fn leaf(&mut self, ty: &LdlType) -> Expr {
        if self.rng.random_bool(0.5) {
            if let Some(v) = self.var_of(ty) {
                return v;
            }
        }
        match ty {
            LdlType::Bool => {
                if self.rng.random_bool(0.5) {
                    let op = *BuiltinOp::COMPARISONS.choose(self.rng).expect("nonempty");
                    Expr::binop(op, self.real_lit(), self.real_lit())
                } else if self.rng.random_bool(0.5) {
                    Expr::top()
                } else {
                    Expr::bottom()
                }
            }
            LdlType::Real => self.real_lit(),
            LdlType::Vec(n) => Expr::vec((0..*n).map(|_| self.real_lit()).collect()),
            LdlType::Index(n) => Expr::index(self.rng.random_range(0..*n)),
            LdlType::Fun(..) => unreachable!("only simple types are generated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{BoundTypeCtx, NetworkTypeCtx};
    use crate::typeck::{check, check_against};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_terms_typecheck() {
        let cfg = GenConfig {
            infinite_quantifiers: true,
            network: Some(("f".into(), 2, 2)),
            ..GenConfig::default()
        };
        let mut nets = NetworkTypeCtx::new();
        nets.insert("f".into(), (2, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let ty = gen_simple_type(&mut rng, &cfg);
            let e = gen_term(&mut rng, &ty, &cfg);
            assert!(e.is_locally_closed() && e.free_vars().is_empty(), "{e}");
            check_against(&nets, &BoundTypeCtx::new(), &e, &ty).unwrap_or_else(|err| panic!("{e}: {err}"));
        }
        let p = gen_property(&mut rng, &[LdlType::Real, LdlType::Vec(2)], &cfg);
        let want = LdlType::curried([LdlType::Real, LdlType::Vec(2)], LdlType::Bool);
        assert_eq!(check(&nets, &BoundTypeCtx::new(), &p).unwrap(), want);
    }
}
