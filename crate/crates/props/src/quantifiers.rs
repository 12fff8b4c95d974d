//! Quantifier commutativity: `∀x. ∧(A_1, …, A_M)` against
//! `∧(∀x. A_1, …, ∀x. A_M)`, and the dual for `∃` and `∨`.
//!
//! Finite quantifiers are tested over `Index n`; infinite ones over a real
//! variable whose samples are shared by both sides (samples are drawn per
//! variable name, and both sides bind the same name).

use ldl_core::ast::BuiltinOp;
use ldl_core::logic::Logic;
use ldl_core::pretty::format_real;
use ldl_core::sampling::{Distribution, SamplingConfig};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Property, PropertyVerdict, Witness};

pub const TOLERANCE: f64 = 1e-12;
const SAMPLES: usize = 32;

fn constant(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-4i32..=4) as f64 * 0.5
}

fn comparison(rng: &mut ChaCha8Rng) -> &'static str {
    BuiltinOp::COMPARISONS.choose(rng).expect("nonempty").symbol()
}

/// Builds both sides from atom bodies mentioning the variable `binder`.
fn sides(forall: bool, binder: &str, ty: &str, atoms: &[String]) -> (String, String) {
    let (q, join) = if forall { ("forall", " and ") } else { ("exists", " or ") };
    let parts: Vec<String> = atoms.iter().map(|a| format!("({a})")).collect();
    let lhs = format!("{q} ({binder} : {ty}) . {}", parts.join(join));
    let quantified: Vec<String> = parts.iter().map(|a| format!("({q} ({binder} : {ty}) . {a})")).collect();
    (lhs, quantified.join(join))
}

fn finite_instance(rng: &mut ChaCha8Rng) -> Witness {
    let n = *[2usize, 3, 5].choose(rng).expect("nonempty");
    let m = rng.random_range(2..=3);
    let atoms: Vec<String> = (0..m)
        .map(|_| {
            let v: Vec<String> = (0..n).map(|_| format_real(constant(rng))).collect();
            format!("[{}] ! i {} {}", v.join(", "), comparison(rng), format_real(constant(rng)))
        })
        .collect();
    let (lhs, rhs) = sides(rng.random_bool(0.5), "i", &format!("Index {n}"), &atoms);
    Witness::QuantifierSwap {
        lhs,
        rhs,
        sampler: None,
        sampling: SamplingConfig::default(),
    }
}

fn infinite_instance(rng: &mut ChaCha8Rng, seed: u64) -> Witness {
    let m = rng.random_range(2..=3);
    let atoms: Vec<String> = (0..m)
        .map(|_| {
            let s = loop {
                let s = constant(rng);
                if s != 0.0 {
                    break s;
                }
            };
            format!("{} * x {} {}", format_real(s), comparison(rng), format_real(constant(rng)))
        })
        .collect();
    let (lhs, rhs) = sides(rng.random_bool(0.5), "x", "Real", &atoms);
    Witness::QuantifierSwap {
        lhs,
        rhs,
        sampler: Some(("x".into(), Distribution::uniform_cube(1, -2.0, 2.0))),
        sampling: SamplingConfig::new(SAMPLES, seed, 0),
    }
}

/// Two conjuncts minimised at different points of a two-point domain.
pub fn split_minimum_instance() -> Witness {
    let (lhs, rhs) = sides(true, "x", "Real", &["x == 0.0".into(), "x == 1.0".into()]);
    Witness::QuantifierSwap {
        lhs,
        rhs,
        sampler: Some((
            "x".into(),
            Distribution::Empirical {
                points: vec![vec![0.0], vec![1.0]],
            },
        )),
        sampling: SamplingConfig::new(SAMPLES, 0, 0),
    }
}

pub fn check_quantifier_commutativity(logic: &Logic, trials: usize, seed: u64) -> PropertyVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_kind = (trials / 20).max(50);
    let mut instances = vec![split_minimum_instance()];
    instances.extend((0..per_kind).map(|_| finite_instance(&mut rng)));
    for k in 0..per_kind {
        let sample_seed = seed.wrapping_add(k as u64);
        instances.push(infinite_instance(&mut rng, sample_seed));
    }
    let total = instances.len();
    let mut failures = 0usize;
    let mut first: Option<(f64, Witness)> = None;
    let mut finite_failures = 0usize;
    for (k, w) in instances.into_iter().enumerate() {
        let dev = w.replay(logic);
        if !(dev <= TOLERANCE) {
            failures += 1;
            if (1..=per_kind).contains(&k) {
                finite_failures += 1;
            }
            if first.is_none() {
                first = Some((dev, w));
            }
        }
    }
    let note = format!(
        "{failures} of {total} instances differ ({finite_failures} of {per_kind} finite)"
    );
    match first {
        None => PropertyVerdict::holds(logic, Property::QuantifierCommutativity, total, TOLERANCE),
        Some((dev, w)) => PropertyVerdict::fails(logic, Property::QuantifierCommutativity, total, TOLERANCE, w, dev),
    }
    .with_note(note)
}
