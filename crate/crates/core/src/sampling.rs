//! Seeded sampling used to approximate the extremized expectations that
//! interpret infinite quantifiers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SamplingError {
    #[error("distribution has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("uniform box has lo > hi in component {0}")]
    InvertedBox(usize),
    #[error("gaussian has negative standard deviation in component {0}")]
    NegativeStddev(usize),
    #[error("empirical distribution has no points")]
    EmptyEmpirical,
    #[error("distribution parameters must be finite")]
    NonFinite,
    #[error("sample_count must be at least 1")]
    ZeroSamples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    /// Independent uniform components on `[lo_i, hi_i]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// Independent normal components.
    Gaussian { mean: Vec<f64>, stddev: Vec<f64> },
    /// Uniform choice, with replacement, among fixed points.
    Empirical { points: Vec<Vec<f64>> },
}

impl Distribution {
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Distribution::Uniform { lo, hi }
    }

    pub fn uniform_cube(dim: usize, lo: f64, hi: f64) -> Self {
        Distribution::Uniform {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn point(p: Vec<f64>) -> Self {
        Distribution::Empirical { points: vec![p] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Distribution::Uniform { lo, .. } => lo.len(),
            Distribution::Gaussian { mean, .. } => mean.len(),
            Distribution::Empirical { points } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Distribution::Uniform { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(SamplingError::DimensionMismatch {
                        expected: lo.len(),
                        got: hi.len(),
                    });
                }
                if !finite(lo) || !finite(hi) {
                    return Err(SamplingError::NonFinite);
                }
                if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
                    return Err(SamplingError::InvertedBox(i));
                }
            }
            Distribution::Gaussian { mean, stddev } => {
                if mean.len() != stddev.len() {
                    return Err(SamplingError::DimensionMismatch {
                        expected: mean.len(),
                        got: stddev.len(),
                    });
                }
                if !finite(mean) || !finite(stddev) {
                    return Err(SamplingError::NonFinite);
                }
                if let Some(i) = stddev.iter().position(|&s| s < 0.0) {
                    return Err(SamplingError::NegativeStddev(i));
                }
            }
            Distribution::Empirical { points } => {
                let Some(first) = points.first() else {
                    return Err(SamplingError::EmptyEmpirical);
                };
                for p in points {
                    if p.len() != first.len() {
                        return Err(SamplingError::DimensionMismatch {
                            expected: first.len(),
                            got: p.len(),
                        });
                    }
                    if !finite(p) {
                        return Err(SamplingError::NonFinite);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Distribution::Uniform { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
                .collect(),
            Distribution::Gaussian { mean, stddev } => mean
                .iter()
                .zip(stddev)
                .map(|(&m, &s)| m + s * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Distribution::Empirical { points } => points[rng.random_range(0..points.len())].clone(),
        }
    }

    /// Initial coordinate step sizes for local refinement, or `None` when
    /// the support is discrete.
    fn refine_steps(&self) -> Option<Vec<f64>> {
        match self {
            Distribution::Uniform { lo, hi } => Some(lo.iter().zip(hi).map(|(l, h)| 0.1 * (h - l)).collect()),
            Distribution::Gaussian { stddev, .. } => Some(stddev.iter().map(|s| 0.4 * s).collect()),
            Distribution::Empirical { .. } => None,
        }
    }

    fn clamp(&self, i: usize, v: f64) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => v.clamp(lo[i], hi[i]),
            _ => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub refinement_steps: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            sample_count: 64,
            seed: 0,
            refinement_steps: 0,
        }
    }
}

impl SamplingConfig {
    pub fn new(sample_count: usize, seed: u64, refinement_steps: usize) -> Self {
        SamplingConfig {
            sample_count,
            seed,
            refinement_steps,
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.sample_count == 0 {
            Err(SamplingError::ZeroSamples)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Extremum::Min => candidate < incumbent,
            Extremum::Max => candidate > incumbent,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremumResult {
    pub point: Vec<f64>,
    pub value: f64,
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// RNG for the quantifier binding `name`. Quantifiers binding the same name
/// draw the same sample sequence, and larger sample counts extend smaller ones.
pub fn quantifier_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mixed = seed ^ fnv1a(name).rotate_left(17);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// The sample points a quantifier over `name` evaluates, before refinement.
pub fn sample_points(dist: &Distribution, cfg: &SamplingConfig, name: &str) -> Vec<Vec<f64>> {
    let mut rng = quantifier_rng(cfg.seed, name);
    (0..cfg.sample_count).map(|_| dist.sample(&mut rng)).collect()
}

/// Extremizes `f` over seeded samples of `dist`, then polishes the incumbent
/// by coordinate search. Ties keep the earliest point.
pub fn extremize<E>(
    dist: &Distribution,
    cfg: &SamplingConfig,
    name: &str,
    ext: Extremum,
    mut f: impl FnMut(&[f64]) -> Result<f64, E>,
) -> Result<ExtremumResult, E> {
    let mut best: Option<ExtremumResult> = None;
    for p in sample_points(dist, cfg, name) {
        let v = f(&p)?;
        if best.as_ref().is_none_or(|b| ext.better(v, b.value)) {
            best = Some(ExtremumResult { point: p, value: v });
        }
    }
    let mut best = best.expect("sample_count >= 1");
    let Some(mut steps) = dist.refine_steps() else {
        return Ok(best);
    };
    for _ in 0..cfg.refinement_steps {
        let mut improved = false;
        for i in 0..steps.len() {
            for dir in [1.0, -1.0] {
                let mut q = best.point.clone();
                q[i] = dist.clamp(i, q[i] + dir * steps[i]);
                if q[i] == best.point[i] {
                    continue;
                }
                let v = f(&q)?;
                if ext.better(v, best.value) {
                    best = ExtremumResult { point: q, value: v };
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok(best)
}
