//! Randomized cross-checks between the printer, parser, typechecker,
//! evaluator and graph compiler, driven by generated well-typed terms.

use ldl_core::ast::{BoundTypeCtx, BuiltinOp, Expr, ExprKind, LdlType, NetworkTypeCtx, Quantifier};
use ldl_core::eval::{evaluate, Arg, EvalError, Output, SemanticContext};
use ldl_core::graph::{compile_expr, GraphError};
use ldl_core::logic::{Logic, LogicKind};
use ldl_core::net::{Activation, DenseNetwork};
use ldl_core::parser::parse_expr;
use ldl_core::pretty::pretty;
use ldl_core::sampling::{Distribution, SamplingConfig};
use ldl_core::testgen::{gen_property, gen_simple_type, gen_term, GenConfig, REAL_SAMPLED, VEC_SAMPLED};
use ldl_core::typeck::check_against;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(infinite: bool) -> GenConfig {
    GenConfig {
        infinite_quantifiers: infinite,
        network: Some(("f".into(), 2, 2)),
        ..GenConfig::default()
    }
}

fn nets() -> NetworkTypeCtx {
    let mut n = NetworkTypeCtx::new();
    n.insert("f".into(), (2, 2));
    n
}

fn context(kind: LogicKind, seed: u64) -> SemanticContext {
    let net = DenseNetwork::random(seed, &[2, 3, 2], &[Activation::Relu, Activation::Identity], 1.0).unwrap();
    SemanticContext::new(Logic::new(kind))
        .with_network("f", net)
        .with_sampler(REAL_SAMPLED, Distribution::uniform_cube(1, -2.0, 2.0))
        .with_sampler(VEC_SAMPLED, Distribution::uniform_cube(2, -1.0, 1.0))
        .with_sampling(SamplingConfig::new(8, seed, 0))
}

fn inhabits(out: &Output, ty: &LdlType, logic: &Logic) -> bool {
    match (out, ty) {
        (Output::Truth(t), LdlType::Bool) => logic.in_domain(*t),
        (Output::Real(r), LdlType::Real) => !r.is_nan(),
        (Output::Vec(v), LdlType::Vec(n)) => v.len() == *n && v.iter().all(|x| !x.is_nan()),
        (Output::Index(i), LdlType::Index(n)) => i < n,
        _ => false,
    }
}

/// Replaces every quantifier over `Index n` or `Bool` by the explicit
/// left-nested conjunction or disjunction of its instances.
fn expand_finite(e: &Expr) -> Expr {
    e.rewrite(&mut |x, _| {
        let ExprKind::Quant(q, b, body) = &x.kind else {
            return None;
        };
        let instances: Vec<Expr> = match &b.ty {
            LdlType::Index(n) => (0..*n).map(Expr::index).collect(),
            LdlType::Bool => vec![Expr::top(), Expr::bottom()],
            _ => return None,
        };
        let op = match q {
            Quantifier::Forall => BuiltinOp::And,
            Quantifier::Exists => BuiltinOp::Or,
        };
        let body = expand_finite(body);
        instances
            .iter()
            .map(|v| instantiate(&body, v))
            .reduce(|acc, t| Expr::binop(op, acc, t))
    })
}

/// Substitutes `value` for the dangling binder of `body` and renumbers
/// references to binders further out.
fn instantiate(body: &Expr, value: &Expr) -> Expr {
    body.rewrite(&mut |x, depth| match &x.kind {
        ExprKind::Bound { index, .. } if *index == depth => Some(value.clone()),
        ExprKind::Bound { name, index } if *index > depth => Some(Expr::from(ExprKind::Bound {
            name: name.clone(),
            index: index - 1,
        })),
        _ => None,
    })
}

fn random_arg(rng: &mut ChaCha8Rng, ty: &LdlType, logic: &Logic) -> Arg {
    match ty {
        LdlType::Real => Arg::Real(rng.random_range(-3.0..3.0)),
        LdlType::Vec(n) => Arg::Vec((0..*n).map(|_| rng.random_range(-3.0..3.0)).collect()),
        LdlType::Bool => Arg::Truth(match logic.kind {
            LogicKind::Dl2 => rng.random_range(-3.0..=0.0),
            LogicKind::Stl => rng.random_range(-3.0..3.0),
            _ => rng.random_range(0.0..=1.0),
        }),
        _ => unreachable!("properties here take no index parameters"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let cfg = config(true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = gen_simple_type(&mut rng, &cfg);
        let e = gen_term(&mut rng, &ty, &cfg);
        let text = pretty(&e);
        let back = parse_expr(&text, &nets(), &[]).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert!(back.alpha_eq(&e), "{}\nreparsed as\n{}", text, pretty(&back));
        prop_assert_eq!(pretty(&back), text);
    }

    #[test]
    fn well_typed_terms_evaluate_into_their_type(seed in any::<u64>(), k in 0usize..6) {
        let cfg = config(true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = gen_simple_type(&mut rng, &cfg);
        let e = gen_term(&mut rng, &ty, &cfg);
        prop_assert!(check_against(&nets(), &BoundTypeCtx::new(), &e, &ty).is_ok());
        let ctx = context(LogicKind::ALL[k], seed);
        let out = evaluate(&e, &ctx).map_err(|err| TestCaseError::fail(format!("{e}: {err}")))?;
        prop_assert!(inhabits(&out, &ty, &ctx.logic), "{} : {} gave {:?}", pretty(&e), ty, out);
    }

    #[test]
    fn finite_quantifiers_equal_their_expansion(seed in any::<u64>(), k in 0usize..6) {
        let cfg = config(false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = gen_term(&mut rng, &LdlType::Bool, &cfg);
        let expanded = expand_finite(&e);
        let ctx = context(LogicKind::ALL[k], seed);
        let (Output::Truth(a), Output::Truth(b)) = (evaluate(&e, &ctx).unwrap(), evaluate(&expanded, &ctx).unwrap()) else {
            return Err(TestCaseError::fail("not a truth value"));
        };
        prop_assert_eq!(a.to_bits(), b.to_bits(), "{}: {} vs {}", pretty(&e), a, b);
    }

    #[test]
    fn compiled_graphs_match_direct_evaluation(seed in any::<u64>(), k in 0usize..6) {
        let cfg = config(true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = [LdlType::Real, LdlType::Vec(2), LdlType::Bool];
        let p = gen_property(&mut rng, &params, &cfg);
        let ctx = context(LogicKind::ALL[k], seed);
        let graph = match compile_expr(&p, &ctx.logic, &nets()) {
            Ok(g) => g,
            // DL2 has no negation of a truth-valued parameter
            Err(GraphError::Eval(EvalError::Negation(_))) if ctx.logic.kind == LogicKind::Dl2 => {
                return Err(TestCaseError::reject("negated Boolean parameter under DL2"));
            }
            Err(err) => return Err(TestCaseError::fail(format!("{p}: {err}"))),
        };
        for _ in 0..5 {
            let args: Vec<Arg> = params.iter().map(|t| random_arg(&mut rng, t, &ctx.logic)).collect();
            let direct = match ldl_core::eval::evaluate_applied(&p, &ctx, &args).unwrap() {
                Output::Truth(t) => t,
                other => return Err(TestCaseError::fail(format!("{other:?}"))),
            };
            let via_graph = graph.evaluate(&ctx, &args).unwrap();
            prop_assert_eq!(direct.to_bits(), via_graph.to_bits(), "{}: {} vs {}", pretty(&p), direct, via_graph);
        }
    }
}
