//! Shadow-lifting: raising one conjunct raises the conjunction.
//!
//! The verdict comes from the equal-conjunct probe: at `A_1 = … = A_M = a`
//! with `a ≠ 0`, the forward difference of `∧_M` along each coordinate must
//! be positive. A second probe estimates the same partials by central
//! differences at general points and is reported as supporting evidence.

use ldl_core::logic::{Logic, LogicKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{sampling_domain, Property, PropertyVerdict, Witness};

/// A partial derivative counts as positive above this.
pub const TOL_POS: f64 = 1e-9;
/// Fraction of probe points at which all partials must be positive.
pub const REQUIRED_FRACTION: f64 = 0.99;
const ARITIES: [usize; 3] = [2, 3, 5];

fn step(a: f64) -> f64 {
    1e-6 * a.abs().max(1.0)
}

/// A nonzero truth value that stays in the domain after a forward step.
fn diagonal_value(rng: &mut ChaCha8Rng, kind: LogicKind) -> f64 {
    let (lo, hi) = sampling_domain(kind);
    loop {
        let a = rng.random_range(lo..hi);
        if a != 0.0 && a + step(a) <= hi {
            return a;
        }
    }
}

fn central_partial(logic: &Logic, args: &[f64], i: usize) -> f64 {
    let h = step(args[i]);
    let mut up = args.to_vec();
    up[i] += h;
    let mut down = args.to_vec();
    down[i] -= h;
    (logic.and_n(&up) - logic.and_n(&down)) / (2.0 * h)
}

/// Fraction of general points (all coordinates nonzero) at which every
/// central-difference partial is positive, skipping points where two
/// conjuncts are within `10h` of each other for the min-based logic.
pub fn general_point_fraction(logic: &Logic, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = sampling_domain(logic.kind);
    let (mut counted, mut positive) = (0usize, 0usize);
    for t in 0..trials {
        let m = ARITIES[t % ARITIES.len()];
        let args: Vec<f64> = (0..m)
            .map(|_| loop {
                let h = step(hi.abs().max(lo.abs()));
                let a = rng.random_range(lo + h..=hi - h);
                if a != 0.0 {
                    break a;
                }
            })
            .collect();
        if logic.kind == LogicKind::Godel {
            let near_tie = args
                .iter()
                .enumerate()
                .any(|(i, a)| args[i + 1..].iter().any(|b| (a - b).abs() < 10.0 * step(*a)));
            if near_tie {
                continue;
            }
        }
        counted += 1;
        if (0..m).all(|i| central_partial(logic, &args, i) > TOL_POS) {
            positive += 1;
        }
    }
    positive as f64 / counted.max(1) as f64
}

pub fn check_shadow_lifting(logic: &Logic, trials: usize, seed: u64) -> PropertyVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut good = 0usize;
    let mut first_failure: Option<(f64, Witness)> = None;
    for t in 0..trials {
        let m = ARITIES[t % ARITIES.len()];
        let a = diagonal_value(&mut rng, logic.kind);
        let args = vec![a; m];
        let mut ok = true;
        for coordinate in 0..m {
            let w = Witness::ShadowLifting {
                args: args.clone(),
                coordinate,
                step: step(a),
            };
            let partial = w.replay(logic);
            if !(partial > TOL_POS) {
                ok = false;
                if first_failure.is_none() {
                    first_failure = Some((partial, w));
                }
                break;
            }
        }
        good += usize::from(ok);
    }
    let fraction = good as f64 / trials.max(1) as f64;
    let general = general_point_fraction(logic, trials.min(2000), seed ^ 0x5eed);
    let note = format!(
        "positive partials at {:.2}% of equal-conjunct points; at general points {:.2}%",
        100.0 * fraction,
        100.0 * general
    );
    match first_failure {
        Some((partial, w)) if fraction < REQUIRED_FRACTION => {
            PropertyVerdict::fails(logic, Property::ShadowLifting, trials, TOL_POS, w, partial).with_note(note)
        }
        _ => PropertyVerdict::holds(logic, Property::ShadowLifting, trials, TOL_POS).with_note(note),
    }
}
