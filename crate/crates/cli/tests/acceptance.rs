//! Acceptance suite: one test per acceptance criterion. Expected values are
//! written out here (the property table, hand-derived closed forms) rather
//! than taken from the code under test.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ldl_core::ast::{BoundTypeCtx, BuiltinOp, Expr, ExprKind, LdlType, NetworkTypeCtx, Quantifier};
use ldl_core::eval::{
    apply_prepared, evaluate, infinite_binders, loss, prepare, spec_params, truth_value, Arg, EvalError, Output,
    SemanticContext,
};
use ldl_core::graph::{compile, GraphError};
use ldl_core::logic::{Logic, LogicKind};
use ldl_core::net::{Activation, ContextFile, DenseNetwork};
use ldl_core::parser::{parse, parse_expr};
use ldl_core::pretty::{ast_dump, pretty};
use ldl_core::real::NumericReal;
use ldl_core::sampling::{Distribution, SamplingConfig};
use ldl_core::tape::{self, TapeVar};
use ldl_core::testgen::{gen_property, gen_simple_type, gen_term, GenConfig, REAL_SAMPLED, VEC_SAMPLED};
use ldl_core::typeck::check_against;
use ldl_props::soundness::{check_soundness, classical_eval, directed_search};
use ldl_props::{Verdict, Witness};
use ldl_train::{make_synthetic_dataset, train, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_file(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_file(name)).unwrap()
}

const LOGICS: [&str; 6] = ["dl2", "godel", "lukasiewicz", "yager", "product", "stl"];

// ---------------------------------------------------------------------------
// property matrix

/// Rows of the property table, in the column order of `LOGICS`.
const TABLE: [(&str, [&str; 6]); 8] = [
    ("weak_smoothness", ["yes", "no", "no", "no", "yes", "yes"]),
    ("shadow_lifting", ["yes", "no", "no", "no", "yes", "yes"]),
    ("scale_invariance", ["yes", "yes", "no", "no", "no", "yes"]),
    ("idempotence", ["no", "yes", "no", "no", "no", "yes"]),
    ("commutativity", ["yes", "yes", "yes", "yes", "yes", "yes"]),
    ("associativity", ["yes", "yes", "yes", "yes", "yes", "no"]),
    ("quantifier_commutativity", ["no", "yes", "no", "no", "no", "no"]),
    ("soundness", ["yes", "yes", "no", "no", "yes", "no"]),
];

#[test]
fn property_matrix_reproduces_the_table() {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ldl"))
        .args(["props", "--all", "--trials", "10000", "--seed", "7", "--report", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let verdicts: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdicts.len(), 48);
    let mut mismatches = Vec::new();
    for (property, row) in TABLE {
        for (logic, want) in LOGICS.iter().zip(row) {
            let v = verdicts
                .iter()
                .find(|v| v["logic"] == *logic && v["property"] == property)
                .unwrap_or_else(|| panic!("no verdict for {logic} {property}"));
            let verdict = v["verdict"].as_str().unwrap();
            let got = match (property, *logic, verdict) {
                // nothing reaches top under STL, so soundness is vacuous
                ("soundness", "stl", "vacuous") => "no",
                (_, _, "holds") => "yes",
                (_, _, "fails") => "no",
                _ => "unexpected",
            };
            if got != want {
                mismatches.push(format!("{logic} {property}: {verdict}, expected {want}"));
            }
            assert_eq!(v["advisory"] == true, property == "weak_smoothness", "{logic} {property}");
            if verdict == "fails" {
                assert!(!v["witness"].is_null(), "{logic} {property} has no witness");
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
    eprintln!("property matrix: {:.1?}", start.elapsed());
    assert!(start.elapsed().as_secs() < 60);
}

// ---------------------------------------------------------------------------
// soundness

#[test]
fn soundness_oracle_suite() {
    let start = Instant::now();
    for kind in [LogicKind::Godel, LogicKind::Product, LogicKind::Dl2] {
        let v = check_soundness(&Logic::new(kind), 10_000, 7);
        assert_eq!(v.verdict, Verdict::Holds, "{}", v.to_line());
        assert!(v.note.contains(" 0 violations"), "{}", v.note);
    }

    let luk = Logic::new(LogicKind::Lukasiewicz);
    let Some(Witness::Unsound { formula }) = directed_search(&luk) else {
        panic!("no Lukasiewicz counterexample on the constant grid");
    };
    let e = parse_expr(&formula, &NetworkTypeCtx::new(), &[]).unwrap();
    let Output::Truth(t) = evaluate(&e, &SemanticContext::new(luk)).unwrap() else {
        panic!("not a formula: {formula}");
    };
    assert_eq!(t, 1.0, "{formula}");
    assert!(!classical_eval(&e).unwrap(), "{formula}");
    eprintln!("soundness suite: {:.1?}", start.elapsed());
    assert!(start.elapsed().as_secs() < 30);
}

// ---------------------------------------------------------------------------
// generated terms

fn gen_config(infinite: bool) -> GenConfig {
    GenConfig {
        infinite_quantifiers: infinite,
        network: Some(("f".into(), 2, 2)),
        ..GenConfig::default()
    }
}

fn gen_nets() -> NetworkTypeCtx {
    let mut n = NetworkTypeCtx::new();
    n.insert("f".into(), (2, 2));
    n
}

fn gen_context(kind: LogicKind, seed: u64) -> SemanticContext {
    let net = DenseNetwork::random(seed, &[2, 3, 2], &[Activation::Relu, Activation::Identity], 1.0).unwrap();
    SemanticContext::new(Logic::new(kind))
        .with_network("f", net)
        .with_sampler(REAL_SAMPLED, Distribution::uniform_cube(1, -2.0, 2.0))
        .with_sampler(VEC_SAMPLED, Distribution::uniform_cube(2, -1.0, 1.0))
        .with_sampling(SamplingConfig::new(8, seed, 0))
}

/// Truth-domain bounds per logic, stated independently of the library.
fn in_truth_domain(kind: LogicKind, t: f64) -> bool {
    match kind {
        LogicKind::Dl2 => t <= 0.0,
        LogicKind::Stl => !t.is_nan(),
        _ => (0.0..=1.0).contains(&t),
    }
}

fn inhabits(out: &Output, ty: &LdlType, kind: LogicKind) -> bool {
    match (out, ty) {
        (Output::Truth(t), LdlType::Bool) => in_truth_domain(kind, *t),
        (Output::Real(r), LdlType::Real) => !r.is_nan(),
        (Output::Vec(v), LdlType::Vec(n)) => v.len() == *n && v.iter().all(|x| !x.is_nan()),
        (Output::Index(i), LdlType::Index(n)) => i < n,
        _ => false,
    }
}

#[test]
fn well_typed_terms_inhabit_their_type() {
    let cfg = gen_config(true);
    let mut failures = Vec::new();
    for kind in LogicKind::ALL {
        for k in 0..1000u64 {
            let seed = k * 6 + kind as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ty = gen_simple_type(&mut rng, &cfg);
            let e = gen_term(&mut rng, &ty, &cfg);
            check_against(&gen_nets(), &BoundTypeCtx::new(), &e, &ty).unwrap();
            match evaluate(&e, &gen_context(kind, seed)) {
                Ok(out) if inhabits(&out, &ty, kind) => {}
                other => failures.push(format!("{kind} {}: {other:?}", pretty(&e))),
            }
        }
    }
    assert!(failures.is_empty(), "{} failures, first: {}", failures.len(), failures[0]);
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

fn has_finite_quantifier(e: &Expr) -> bool {
    let mut found = false;
    e.visit(&mut |x, _| {
        if let ExprKind::Quant(_, b, _) = &x.kind {
            found |= matches!(b.ty, LdlType::Index(_) | LdlType::Bool);
        }
    });
    found
}

#[test]
fn finite_quantifiers_equal_their_expansion() {
    let cfg = gen_config(false);
    let mut formulas = 0;
    let mut seed = 0u64;
    while formulas < 500 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = gen_term(&mut rng, &LdlType::Bool, &cfg);
        if !has_finite_quantifier(&e) {
            continue;
        }
        formulas += 1;
        let expanded = expand_finite(&e);
        for kind in LogicKind::ALL {
            let ctx = gen_context(kind, seed);
            let (Output::Truth(a), Output::Truth(b)) = (evaluate(&e, &ctx).unwrap(), evaluate(&expanded, &ctx).unwrap())
            else {
                panic!("not a truth value");
            };
            assert_eq!(a.to_bits(), b.to_bits(), "{kind} {}: {a} vs {b}", pretty(&e));
        }
    }
}

// ---------------------------------------------------------------------------
// the two-dimensional robustness example, by hand

/// DL2 primitives written out directly: comparisons penalise by the
/// violated amount, conjunction adds, disjunction multiplies the penalties.
fn dl2_leq(a: f64, b: f64) -> f64 {
    -(a - b).max(0.0)
}

fn dl2_or(a: f64, b: f64) -> f64 {
    -(a * b)
}

/// DL2 value of the robustness property for an identity network at a single
/// sample `x`: `not (bounded x xhat eps) or bounded x xhat delta`, with the
/// negation pushed into strict comparisons per component.
fn robustness_closed_form(x: [f64; 2], xhat: [f64; 2], eps: f64, delta: f64) -> f64 {
    let outside = |i: usize| {
        let d = x[i] - xhat[i];
        // not (-eps <= d and d <= eps)  =  d < -eps or eps < d
        dl2_or(dl2_leq(d, -eps), dl2_leq(eps, d))
    };
    let within = |i: usize| {
        let d = x[i] - xhat[i];
        dl2_leq(-delta, d) + dl2_leq(d, delta)
    };
    let antecedent_fails = dl2_or(outside(0), outside(1));
    let consequent = within(0) + within(1);
    dl2_or(antecedent_fails, consequent)
}

#[test]
fn robustness_loss_matches_hand_derivation() {
    let spec = parse(&read("robustness2d.ldl")).unwrap();
    let ctx_file = ContextFile::load(corpus_file("robustness2d.ctx")).unwrap();
    let build = |delta: f64| {
        let logic = Logic::new(LogicKind::Dl2);
        let mut ctx = SemanticContext::new(logic).with_network("f", DenseNetwork::identity(2));
        for (name, d) in &ctx_file.samplers {
            ctx = ctx.with_sampler(name.clone(), d.clone());
        }
        let args = vec![Arg::Real(0.1), Arg::Real(delta), Arg::Vec(vec![0.0, 0.0])];
        (ctx, args)
    };

    // violated: the output moves 0.05 but only 0.01 is allowed
    let want = robustness_closed_form([0.05, 0.0], [0.0, 0.0], 0.1, 0.01);
    assert!((want - -3e-6).abs() < 1e-15, "closed form {want}");
    let (ctx, args) = build(0.01);
    let got = loss(&spec, &ctx, &args).unwrap();
    assert!((got - -want).abs() <= 1e-12, "loss {got}, expected {}", -want);
    assert!((truth_value(&spec, &ctx, &args).unwrap() - want).abs() <= 1e-12);

    // satisfied: 0.1 is allowed
    assert_eq!(robustness_closed_form([0.05, 0.0], [0.0, 0.0], 0.1, 0.1), 0.0);
    let (ctx, args) = build(0.1);
    assert_eq!(loss(&spec, &ctx, &args).unwrap(), 0.0);
}

// ---------------------------------------------------------------------------
// gradients

fn random_net(rng: &mut ChaCha8Rng, din: usize, dout: usize) -> DenseNetwork {
    let hidden = rng.random_range(1..5);
    let last = if rng.random_bool(0.5) { Activation::Softmax } else { Activation::Identity };
    DenseNetwork::random(rng.random(), &[din, hidden, dout], &[Activation::Relu, last], 1.0).unwrap()
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Compares `analytic` with central differences of `f` around `p0`,
/// skipping coordinates where halving the step changes the quotient by more
/// than `kink` (a relu, min or max kink lies within the step).
fn check_gradient(f: impl Fn(&[f64]) -> f64, p0: &[f64], analytic: &[f64], rel: f64, kink: f64) -> Result<usize, String> {
    let h = 1e-6;
    let mut checked = 0;
    for k in 0..p0.len() {
        let at = |v: f64| {
            let mut p = p0.to_vec();
            p[k] = v;
            f(&p)
        };
        let num = central(at, p0[k], h);
        let finer = central(at, p0[k], h / 4.0);
        if !num.is_finite() || (num - finer).abs() > kink * num.abs().max(1.0) {
            continue;
        }
        checked += 1;
        if (num - analytic[k]).abs() > rel * num.abs().max(1.0) {
            return Err(format!("coordinate {k}: numeric {num}, analytic {}", analytic[k]));
        }
    }
    Ok(checked)
}

#[test]
fn network_gradients_match_finite_differences() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (din, dout) = (rng.random_range(1..4), rng.random_range(1..4));
        let net = random_net(&mut rng, din, dout);
        let x: Vec<f64> = (0..din).map(|_| rng.random_range(-2.0..2.0)).collect();
        let w: Vec<f64> = (0..dout).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dot = |y: Vec<f64>| -> f64 { y.iter().zip(&w).map(|(a, b)| a * b).sum() };
        let (_, trace) = net.forward_with_gradient(&x).unwrap();
        let (dx, grad) = trace.backward(&w);
        let by_params = |p: &[f64]| {
            let mut n = net.clone();
            n.set_params(p);
            dot(n.forward(&x).unwrap())
        };
        check_gradient(by_params, &net.params(), &grad.flatten(), 1e-4, 1e-6).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let by_input = |xx: &[f64]| dot(net.forward(xx).unwrap());
        check_gradient(by_input, &x, &dx, 1e-4, 1e-6).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn logic_loss_gradients_match_finite_differences() {
    let cfg = gen_config(false);
    let mut configurations = 0;
    let mut seed = 0u64;
    while configurations < 100 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = gen_property(&mut rng, &[LdlType::Vec(2)], &cfg);
        let logic = Logic::new(LogicKind::ALL[(seed % 6) as usize]);
        let Ok(prepared) = prepare(&p, &logic) else {
            continue;
        };
        let net = random_net(&mut rng, 2, 2);
        let args = [Arg::Vec(vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])];
        let ctx = SemanticContext::new(logic).with_network("f", net.clone());
        tape::reset();
        let t = apply_prepared::<TapeVar>(&prepared, &ctx, &args).unwrap();
        if !t.value().is_finite() {
            continue;
        }
        // gradient of the loss, which is the negated truth value
        let grad: Vec<f64> = match tape::backward(&t).network("f") {
            Some(g) => g.flatten().iter().map(|x| -x).collect(),
            None => vec![0.0; net.num_params()],
        };
        let loss_at = |q: &[f64]| {
            let mut n = net.clone();
            n.set_params(q);
            let ctx = SemanticContext::new(logic).with_network("f", n);
            logic.penalty(&apply_prepared::<f64>(&prepared, &ctx, &args).unwrap())
        };
        check_gradient(loss_at, &net.params(), &grad, 1e-3, 1e-5)
            .unwrap_or_else(|e| panic!("seed {seed}, {}: {}: {e}", logic.kind, pretty(&p)));
        configurations += 1;
    }
}

// ---------------------------------------------------------------------------
// compiled graphs against the interpreter

fn corpus_specs() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ldl"))
        .collect();
    files.sort();
    files
}

fn random_arg(rng: &mut ChaCha8Rng, ty: &LdlType, kind: LogicKind) -> Arg {
    match ty {
        LdlType::Real => Arg::Real(rng.random_range(-2.0..2.0)),
        LdlType::Vec(n) => Arg::Vec((0..*n).map(|_| rng.random_range(-2.0..2.0)).collect()),
        LdlType::Index(n) => Arg::Index(rng.random_range(0..*n)),
        LdlType::Bool => Arg::Truth(match kind {
            LogicKind::Dl2 => rng.random_range(-2.0..=0.0),
            LogicKind::Stl => rng.random_range(-2.0..2.0),
            _ => rng.random_range(0.0..=1.0),
        }),
        LdlType::Fun(..) => unreachable!("root parameters are first order"),
    }
}

#[test]
fn compiled_graphs_equal_direct_evaluation() {
    let specs = corpus_specs();
    assert!(specs.len() >= 20);
    let mut compared = 0usize;
    for path in specs.iter().take(20) {
        let spec = parse(&std::fs::read_to_string(path).unwrap()).unwrap();
        let params = spec_params(&spec);
        let samplers = infinite_binders(&spec.root_expr());
        for kind in LogicKind::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(compared as u64);
            let mut ctx = SemanticContext::new(Logic::new(kind)).with_sampling(SamplingConfig::new(8, 3, 0));
            for n in &spec.networks {
                let net = DenseNetwork::random(rng.random(), &[n.input, 3, n.output], &[Activation::Relu, Activation::Identity], 1.0)
                    .unwrap();
                ctx = ctx.with_network(n.name.clone(), net);
            }
            for b in &samplers {
                let dim = b.ty.real_dim().unwrap();
                ctx = ctx.with_sampler(b.name.clone(), Distribution::uniform_cube(dim, -1.0, 1.0));
            }
            let graph = match compile(&spec, &ctx.logic) {
                Ok(g) => Some(g),
                // the interpreter must refuse the same spec
                Err(GraphError::Eval(err @ EvalError::Negation(_))) => {
                    let args: Vec<Arg> = params.iter().map(|b| random_arg(&mut rng, &b.ty, kind)).collect();
                    assert!(
                        matches!(truth_value(&spec, &ctx, &args), Err(EvalError::Negation(_))),
                        "{} under {kind}: graph refused with {err}, interpreter did not",
                        path.display()
                    );
                    None
                }
                Err(err) => panic!("{} under {kind}: {err}", path.display()),
            };
            let Some(graph) = graph else {
                continue;
            };
            for _ in 0..100 {
                let args: Vec<Arg> = params.iter().map(|b| random_arg(&mut rng, &b.ty, kind)).collect();
                let direct = truth_value(&spec, &ctx, &args).unwrap();
                let via_graph = graph.evaluate(&ctx, &args).unwrap();
                assert_eq!(direct.to_bits(), via_graph.to_bits(), "{} under {kind}: {direct} vs {via_graph}", path.display());
                compared += 1;
            }
        }
    }
    eprintln!("compared {compared} graph evaluations");
}

// ---------------------------------------------------------------------------
// training

struct TrainSetup {
    spec: ldl_core::parser::SpecFile,
    net: DenseNetwork,
    ctx: ContextFile,
}

fn train_setup() -> TrainSetup {
    TrainSetup {
        spec: parse(&read("robust_perturb.ldl")).unwrap(),
        net: DenseNetwork::load(corpus_file("softmax2.net")).unwrap(),
        ctx: ContextFile::load(corpus_file("robust_perturb.ctx")).unwrap(),
    }
}

fn run_training(s: &TrainSetup, kind: LogicKind, alpha: f64, beta: f64, seed: u64) -> ldl_train::TrainReport {
    let data = make_synthetic_dataset(100 + seed, 200, 1.0);
    let cfg = TrainConfig {
        alpha,
        beta,
        seed,
        ..TrainConfig::default()
    };
    train(&s.spec, &s.net, &data, &s.ctx, Logic::new(kind), &cfg).unwrap().1
}

#[test]
fn constraint_training_trend() {
    let start = Instant::now();
    let s = train_setup();
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 0..10 {
        let with_dl = run_training(&s, LogicKind::Godel, 1.0, 1.0, seed).last().satisfaction;
        let baseline = run_training(&s, LogicKind::Godel, 1.0, 0.0, seed).last().satisfaction;
        wins += usize::from(with_dl >= baseline);
        rows.push(format!("seed {seed}: {with_dl:.3} vs {baseline:.3}"));
    }
    assert!(wins >= 8, "only {wins} of 10 seeds: {rows:#?}");

    for seed in 0..10 {
        let report = run_training(&s, LogicKind::Dl2, 0.0, 1.0, seed);
        let dl: Vec<f64> = report.epochs.iter().map(|e| e.dl).collect();
        assert_eq!(dl.len(), 10);
        for w in dl.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "seed {seed}: DL loss rose from {} to {}: {dl:?}", w[0], w[1]);
        }
    }
    eprintln!("training trend: {:.1?}", start.elapsed());
    assert!(start.elapsed().as_secs() < 300);
}

// ---------------------------------------------------------------------------
// parser and printer

#[test]
fn printer_parser_round_trip_and_golden() {
    let cfg = gen_config(true);
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ty = gen_simple_type(&mut rng, &cfg);
        let e = gen_term(&mut rng, &ty, &cfg);
        let text = pretty(&e);
        let back = parse_expr(&text, &gen_nets(), &[]).unwrap_or_else(|err| panic!("{text}: {err}"));
        assert!(back.alpha_eq(&e), "{text}\nreparsed as\n{}", pretty(&back));
    }
    let spec = parse(&read("robustness.ldl")).unwrap();
    assert_eq!(ast_dump(&spec.root_expr()), read("robustness.ast"));
}
