//! Weak smoothness: the connectives are continuous, with a continuous
//! gradient wherever the minimum of their arguments is unique.
//!
//! The probe walks random lines through the truth domain, watches the
//! directional derivative for jumps between grid points, and bisects each
//! jump down to a small interval. A jump that survives bisection is a kink;
//! it disqualifies the logic when the two smallest arguments there are
//! distinct. The result is numerical evidence, so verdicts are advisory.
//! The same probe is run on `<=` and reported in the note.

use std::fmt;

use ldl_core::ast::BuiltinOp;
use ldl_core::logic::{Logic, LogicKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Property, PropertyVerdict, Verdict, Witness};

/// Smallest derivative jump treated as a discontinuity.
pub const JUMP: f64 = 1e-3;
const GRID: usize = 100;
const DIFF_STEP: f64 = 1e-8;
const BISECT_WIDTH: f64 = 1e-6;
/// Arguments closer than this count as a tie.
const TIE_GAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connective {
    And,
    And3,
    Or,
    Implies,
    /// The comparison `a <= b`, as a function of `a` and `b`.
    Leq,
}

impl Connective {
    pub const CONNECTIVES: [Connective; 4] = [Connective::And, Connective::And3, Connective::Or, Connective::Implies];

    pub fn arity(self) -> usize {
        match self {
            Connective::And3 => 3,
            _ => 2,
        }
    }

    pub fn supported(self, logic: &Logic) -> bool {
        !(self == Connective::Implies && logic.kind == LogicKind::Dl2)
    }

    pub fn apply(self, logic: &Logic, x: &[f64]) -> f64 {
        match self {
            Connective::And => logic.and(&x[0], &x[1]),
            Connective::And3 => logic.and_n(&x[..3]),
            Connective::Or => logic.or(&x[0], &x[1]),
            Connective::Implies => logic.implies(&x[0], &x[1]).unwrap_or(f64::NAN),
            Connective::Leq => logic.compare(BuiltinOp::Leq, &x[0], &x[1]),
        }
    }

    /// Box of argument values probed: the truth domain kept away from its
    /// ends, or a range of reals for the comparison.
    fn probe_box(self, kind: LogicKind) -> (f64, f64) {
        match (self, kind) {
            (Connective::Leq, _) => (-2.0, 2.0),
            (_, LogicKind::Dl2) => (-2.0, -1e-3),
            (_, LogicKind::Stl) => (-2.0, 2.0),
            _ => (1e-3, 1.0 - 1e-3),
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::And3 => "and3",
            Connective::Or => "or",
            Connective::Implies => "implies",
            Connective::Leq => "<=",
        })
    }
}

/// Central-difference derivative of `c` at `x` along `d`.
pub fn directional_derivative(logic: &Logic, c: Connective, x: &[f64], d: &[f64]) -> f64 {
    let at = |s: f64| -> Vec<f64> { x.iter().zip(d).map(|(p, q)| p + s * q).collect() };
    (c.apply(logic, &at(DIFF_STEP)) - c.apply(logic, &at(-DIFF_STEP))) / (2.0 * DIFF_STEP)
}

fn unique_minimum(x: &[f64]) -> bool {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v[1] - v[0] > TIE_GAP
}

struct Line {
    origin: Vec<f64>,
    direction: Vec<f64>,
    t0: f64,
    t1: f64,
}

impl Line {
    fn random(rng: &mut ChaCha8Rng, dim: usize, (lo, hi): (f64, f64)) -> Line {
        let origin: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
        let mut direction: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        direction.iter_mut().for_each(|x| *x /= norm);
        // clip the parameter range to the box
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for (p, d) in origin.iter().zip(&direction) {
            if d.abs() < 1e-12 {
                continue;
            }
            let (a, b) = ((lo - p) / d, (hi - p) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        Line {
            origin,
            direction,
            t0,
            t1,
        }
    }

    fn at(&self, t: f64) -> Vec<f64> {
        self.origin.iter().zip(&self.direction).map(|(p, d)| p + t * d).collect()
    }
}

/// Searches `lines` random lines for a kink of `c`. With `need_unique`,
/// kinks at tied arguments are ignored.
fn find_kink(logic: &Logic, c: Connective, lines: usize, rng: &mut ChaCha8Rng, need_unique: bool) -> Option<(f64, Witness)> {
    let deriv = |line: &Line, t: f64| directional_derivative(logic, c, &line.at(t), &line.direction);
    for _ in 0..lines {
        let line = Line::random(rng, c.arity(), c.probe_box(logic.kind));
        if !(line.t1 - line.t0 > 1e-3) {
            continue;
        }
        let grid: Vec<f64> = (0..GRID)
            .map(|k| line.t0 + 1e-5 + (line.t1 - line.t0 - 2e-5) * k as f64 / (GRID - 1) as f64)
            .collect();
        let slopes: Vec<f64> = grid.iter().map(|&t| deriv(&line, t)).collect();
        for k in 0..GRID - 1 {
            if !((slopes[k + 1] - slopes[k]).abs() > JUMP) {
                continue;
            }
            let (mut lo, mut hi) = (grid[k], grid[k + 1]);
            let (mut dlo, mut dhi) = (slopes[k], slopes[k + 1]);
            while hi - lo > BISECT_WIDTH {
                let mid = 0.5 * (lo + hi);
                let dmid = deriv(&line, mid);
                if (dmid - dlo).abs() >= (dhi - dmid).abs() {
                    hi = mid;
                    dhi = dmid;
                } else {
                    lo = mid;
                    dlo = dmid;
                }
            }
            let mid = 0.5 * (lo + hi);
            let point = line.at(mid);
            if need_unique && !unique_minimum(&point) {
                continue;
            }
            let w = Witness::Kink {
                connective: c,
                point,
                direction: line.direction.clone(),
                width: 0.5 * (hi - lo),
            };
            let jump = w.replay(logic);
            if jump > JUMP {
                return Some((jump, w));
            }
        }
    }
    None
}

pub fn check_weak_smoothness(logic: &Logic, trials: usize, seed: u64) -> PropertyVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = (trials / (GRID * 5)).max(8);
    let mut found = None;
    let mut probed = Vec::new();
    for c in Connective::CONNECTIVES {
        if !c.supported(logic) {
            continue;
        }
        probed.push(c.to_string());
        if let Some(k) = find_kink(logic, c, lines, &mut rng, true) {
            found = Some(k);
            break;
        }
    }
    let comparison = match find_kink(logic, Connective::Leq, lines, &mut rng, false) {
        Some((jump, w)) => format!("`<=` has a kink: {w}, jump {}", ldl_core::fmt::g(jump, 4)),
        None => "`<=` showed no kink".to_string(),
    };
    let note = format!("probed {} on {lines} lines each; {comparison}", probed.join(", "));
    let mut v = match found {
        Some((jump, w)) => PropertyVerdict::fails(logic, Property::WeakSmoothness, trials, JUMP, w, jump),
        None => PropertyVerdict::holds(logic, Property::WeakSmoothness, trials, JUMP),
    }
    .with_note(note);
    v.advisory = true;
    debug_assert!(v.verdict != Verdict::Vacuous);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinks_found_where_expected() {
        for (kind, smooth) in [
            (LogicKind::Dl2, true),
            (LogicKind::Godel, false),
            (LogicKind::Lukasiewicz, false),
            (LogicKind::Yager, false),
            (LogicKind::Product, true),
            (LogicKind::Stl, true),
        ] {
            let v = check_weak_smoothness(&Logic::new(kind), 4000, 9);
            assert_eq!(v.verdict == Verdict::Holds, smooth, "{kind}: {}", v.to_line());
            if let Some(w) = &v.witness {
                assert_eq!(w.replay(&Logic::new(kind)), v.magnitude);
            }
        }
    }

    #[test]
    fn godel_implication_kink() {
        // max(1 - a, b) switches branch on b = 1 - a
        let l = Logic::new(LogicKind::Godel);
        let w = Witness::Kink {
            connective: Connective::Implies,
            point: vec![0.3, 0.7],
            direction: vec![0.0, 1.0],
            width: 1e-6,
        };
        assert!((w.replay(&l) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stl_conjunction_has_no_jump_across_sign_change() {
        let l = Logic::new(LogicKind::Stl);
        let w = Witness::Kink {
            connective: Connective::And,
            point: vec![0.0, 0.7],
            direction: vec![1.0, 0.0],
            width: 1e-6,
        };
        assert!(w.replay(&l) < JUMP);
    }
}
