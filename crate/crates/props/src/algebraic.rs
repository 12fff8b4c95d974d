//! Algebraic laws of the conjunction: idempotence, commutativity,
//! associativity and positive scale invariance.

use ldl_core::logic::Logic;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{sampling_domain, Property, PropertyVerdict, Witness};

/// Relative tolerance on the two sides of each law.
pub const TOLERANCE: f64 = 1e-9;

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// One random instance of the law and its relative deviation.
fn instance(logic: &Logic, property: Property, rng: &mut ChaCha8Rng) -> Witness {
    let dom = sampling_domain(logic.kind);
    let m = rng.random_range(2..=5);
    match property {
        Property::Idempotence => Witness::Idempotence {
            value: rng.random_range(dom.0..=dom.1),
            copies: m,
        },
        Property::Commutativity => {
            let mut permutation: Vec<usize> = (0..m).collect();
            permutation.shuffle(rng);
            Witness::Commutativity {
                args: sample(rng, dom, m),
                permutation,
            }
        }
        Property::Associativity => {
            let v = sample(rng, dom, 3);
            Witness::Associativity {
                a: v[0],
                b: v[1],
                c: v[2],
            }
        }
        Property::ScaleInvariance => {
            // alpha in (0, 10]; args shrunk so that alpha·args stays in the domain
            let alpha: f64 = 10.0 - rng.random_range(0.0..10.0);
            let shrink = alpha.max(1.0);
            Witness::ScaleInvariance {
                alpha,
                args: sample(rng, (dom.0 / shrink, dom.1 / shrink), m),
            }
        }
        other => unreachable!("{other} is not an algebraic law"),
    }
}

/// Checks `property` on `trials` random instances. Holds iff every relative
/// deviation is at most [`TOLERANCE`]; otherwise the worst instance is the
/// witness.
pub fn check_algebraic(logic: &Logic, property: Property, trials: usize, seed: u64) -> PropertyVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, Witness)> = None;
    for _ in 0..trials {
        let w = instance(logic, property, &mut rng);
        let dev = w.replay(logic);
        if dev > TOLERANCE && worst.as_ref().is_none_or(|(d, _)| dev > *d) {
            worst = Some((dev, w));
        }
    }
    match worst {
        None => PropertyVerdict::holds(logic, property, trials, TOLERANCE),
        Some((dev, w)) => PropertyVerdict::fails(logic, property, trials, TOLERANCE, w, dev),
    }
}
