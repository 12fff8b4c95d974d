//! Gradient training of a dense network against `α·CE + β·DL`, where CE is
//! the cross-entropy on a labelled dataset and DL the penalty of a logical
//! property under a chosen logic.
//!
//! The property's root parameters are bound from a context file, except
//! for at most one `Vec m` parameter (the "point" parameter), which is
//! bound to each training input in turn. The DL gradient flows through the
//! sample that attains each infinite quantifier's extremum.

use std::collections::BTreeMap;

use ldl_core::ast::{Expr, LdlType};
use ldl_core::classical::holds;
use ldl_core::eval::{apply_prepared, prepare_spec, spec_params, Arg, EvalError, SemanticContext};
use ldl_core::fmt::g17;
use ldl_core::logic::Logic;
use ldl_core::net::{Activation, ContextFile, DenseNetwork, Dataset, Layer, NetError, NetGradient};
use ldl_core::parser::SpecFile;
use ldl_core::real::NumericReal;
use ldl_core::sampling::SamplingConfig;
use ldl_core::tape::{self, TapeVar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Predictions are clamped from below before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("the specification does not fit the training setup: {0}")]
    Spec(String),
    #[error("non-finite {term} loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize, term: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// `-Σ y_i log(max(p_i, 1e-12))`.
pub fn cross_entropy(pred: &[f64], target: &[f64]) -> Result<f64, NetError> {
    if pred.len() != target.len() {
        return Err(NetError::DimensionMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    Ok(-pred
        .iter()
        .zip(target)
        .map(|(p, y)| if *y == 0.0 { 0.0 } else { y * p.max(PROB_FLOOR).ln() })
        .sum::<f64>())
}

/// Derivative of [`cross_entropy`] in the predictions; zero where clamped.
fn cross_entropy_grad(pred: &[f64], target: &[f64]) -> Vec<f64> {
    pred.iter()
        .zip(target)
        .map(|(p, y)| if *p > PROB_FLOOR { -y / p } else { 0.0 })
        .collect()
}

/// Two Gaussian blobs in the plane centred at `(-margin, 0)` (class 0) and
/// `(margin, 0)` (class 1) with unit spread. The first coordinate's noise is
/// clamped to `±margin/2`, so the classes are separated by the line
/// `x0 = 0` with a gap of `margin`.
pub fn make_synthetic_dataset(seed: u64, n_points: usize, margin: f64) -> Dataset {
    assert!(margin > 0.0, "margin must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut inputs = Vec::with_capacity(n_points);
    let mut targets = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let class = k % 2;
        let centre = if class == 0 { -margin } else { margin };
        let dx: f64 = normal.sample(&mut rng);
        let dy: f64 = normal.sample(&mut rng);
        inputs.push(vec![centre + dx.clamp(-margin / 2.0, margin / 2.0), dy]);
        targets.push(if class == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] });
    }
    Dataset::new(inputs, targets).expect("synthetic rows are consistent")
}

/// `n -> n` softmax classifier whose logits start as the identity map.
pub fn identity_softmax(n: usize) -> DenseNetwork {
    let mut w = vec![0.0; n * n];
    (0..n).for_each(|i| w[i * n + i] = 1.0);
    DenseNetwork::new(vec![Layer::new(n, n, Activation::Softmax, w, vec![0.0; n])])
        .expect("identity network is well formed")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    /// Probe points used to measure constraint satisfaction.
    pub eval_samples: usize,
    /// Samples per infinite quantifier when evaluating the DL loss.
    pub dl_samples: usize,
    /// Fraction of the dataset held out for accuracy and satisfaction.
    pub test_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 1.0,
            beta: 1.0,
            epochs: 10,
            batch_size: 16,
            lr: 0.5,
            seed: 0,
            eval_samples: 200,
            dl_samples: 16,
            test_fraction: 0.25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if !(self.alpha >= 0.0 && self.beta >= 0.0) || !(self.alpha + self.beta > 0.0) {
            return bad("alpha and beta must be non-negative with a positive sum");
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("alpha and beta must be finite");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.dl_samples == 0 {
            return bad("epochs, batch size and DL samples must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test fraction must lie strictly between 0 and 1");
        }
        Ok(())
    }
}

/// Metrics logged after one epoch. `ce` and `dl` are means over the
/// training split, the DL loss measured with a fixed sampling seed so that
/// epochs are comparable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub total: f64,
    pub ce: f64,
    pub dl: f64,
    pub test_accuracy: f64,
    pub satisfaction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub logic: String,
    pub epochs: Vec<EpochReport>,
}

impl TrainReport {
    pub fn last(&self) -> &EpochReport {
        self.epochs.last().expect("at least one epoch")
    }

    /// One CSV row per epoch, floats with 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epoch", "total", "ce", "dl", "test_accuracy", "satisfaction"])
            .expect("in-memory write");
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                g17(e.total),
                g17(e.ce),
                g17(e.dl),
                g17(e.test_accuracy),
                g17(e.satisfaction),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// The DL side of training: the prepared property and how to build its
/// arguments for a data point.
struct Objective<'s> {
    spec: &'s SpecFile,
    root: Expr,
    net_name: String,
    fixed: Vec<Option<Arg>>,
    ctx_file: &'s ContextFile,
    logic: Logic,
}

impl<'s> Objective<'s> {
    fn new(spec: &'s SpecFile, net: &DenseNetwork, ctx_file: &'s ContextFile, logic: Logic) -> Result<Self, TrainError> {
        let dims = (net.input_dim(), net.output_dim());
        let matching: Vec<_> = spec.networks.iter().filter(|n| (n.input, n.output) == dims).collect();
        let net_name = match (spec.networks.len(), matching.as_slice()) {
            (1, [n]) => n.name.clone(),
            _ => {
                return Err(TrainError::Spec(format!(
                    "expected exactly one network declaration, of type Vec {} -> Vec {}",
                    dims.0, dims.1
                )))
            }
        };
        let params = spec_params(spec);
        let mut fixed = Vec::new();
        let mut unbound = 0;
        for p in &params {
            match ctx_file.bindings.get(&p.name) {
                Some(b) => fixed.push(Some(Arg::from_binding(b, &p.ty, &logic).map_err(|message| {
                    EvalError::BadArgument {
                        name: p.name.clone(),
                        message,
                    }
                })?)),
                None if p.ty == LdlType::Vec(dims.0) => {
                    unbound += 1;
                    fixed.push(None);
                }
                None => return Err(TrainError::Spec(format!("parameter `{}` has no binding", p.name))),
            }
        }
        if unbound > 1 {
            return Err(TrainError::Spec("more than one parameter is left for the data point".into()));
        }
        let probe = SemanticContext::new(logic).with_network(&net_name, net.clone());
        let probe = with_samplers(probe, ctx_file, SamplingConfig::new(1, 0, 0));
        let dummy = vec![0.0; dims.0];
        let root = prepare_spec(spec, &probe, &Objective::fill(&fixed, &dummy))?;
        Ok(Objective {
            spec,
            root,
            net_name,
            fixed,
            ctx_file,
            logic,
        })
    }

    fn fill(fixed: &[Option<Arg>], x: &[f64]) -> Vec<Arg> {
        fixed
            .iter()
            .map(|a| a.clone().unwrap_or_else(|| Arg::Vec(x.to_vec())))
            .collect()
    }

    fn args(&self, x: &[f64]) -> Vec<Arg> {
        Objective::fill(&self.fixed, x)
    }

    fn context(&self, net: &DenseNetwork, sampling: SamplingConfig) -> SemanticContext {
        let ctx = SemanticContext::new(self.logic).with_network(&self.net_name, net.clone());
        with_samplers(ctx, self.ctx_file, sampling)
    }

    /// DL loss at `x` and its gradient in the network parameters.
    fn loss_and_grad(&self, ctx: &SemanticContext, x: &[f64]) -> Result<(f64, Option<NetGradient>), TrainError> {
        tape::reset();
        let t = apply_prepared::<TapeVar>(&self.root, ctx, &self.args(x))?;
        let loss = self.logic.penalty(&t.value());
        let g = tape::backward(&t);
        // loss = c - t (or -t), so its gradient is minus the truth gradient
        let grad = g.network(&self.net_name).cloned().map(|mut n| {
            n.weights.iter_mut().flatten().for_each(|v| *v = -*v);
            n.bias.iter_mut().flatten().for_each(|v| *v = -*v);
            n
        });
        tape::reset();
        Ok((loss, grad))
    }

    fn loss(&self, ctx: &SemanticContext, x: &[f64]) -> Result<f64, TrainError> {
        let t = apply_prepared::<f64>(&self.root, ctx, &self.args(x))?;
        Ok(self.logic.penalty(&t))
    }

    fn holds(&self, ctx: &SemanticContext, x: &[f64]) -> Result<bool, TrainError> {
        Ok(holds(&self.spec.root_expr(), ctx, &self.args(x))?)
    }

}

fn with_samplers(mut ctx: SemanticContext, file: &ContextFile, sampling: SamplingConfig) -> SemanticContext {
    for (name, d) in &file.samplers {
        ctx = ctx.with_sampler(name, d.clone());
    }
    ctx.with_sampling(sampling)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.rotate_left(32));
    rng.random()
}

#[allow(clippy::too_many_arguments)]
/// Per-parameter gradient of `α·CE + β·DL` averaged over `rows`, with the
/// DL loss sampled under `sampling`. Also returns the two mean components.
pub fn batch_gradient(
    spec: &SpecFile,
    net: &DenseNetwork,
    data: &Dataset,
    rows: &[usize],
    ctx_file: &ContextFile,
    logic: Logic,
    alpha: f64,
    beta: f64,
    sampling: SamplingConfig,
) -> Result<(NetGradient, f64, f64), TrainError> {
    let obj = Objective::new(spec, net, ctx_file, logic)?;
    obj_batch_gradient(&obj, net, data, rows, alpha, beta, sampling)
}

fn obj_batch_gradient(
    obj: &Objective<'_>,
    net: &DenseNetwork,
    data: &Dataset,
    rows: &[usize],
    alpha: f64,
    beta: f64,
    sampling: SamplingConfig,
) -> Result<(NetGradient, f64, f64), TrainError> {
    let n = rows.len() as f64;
    let mut grad = NetGradient::zeros(net);
    let (mut ce, mut dl) = (0.0, 0.0);
    for &r in rows {
        let (x, y) = (&data.inputs[r], &data.targets[r]);
        let (pred, trace) = net.forward_with_gradient(x)?;
        ce += cross_entropy(&pred, y)? / n;
        if alpha != 0.0 {
            let dy: Vec<f64> = cross_entropy_grad(&pred, y).iter().map(|d| d * alpha / n).collect();
            trace.backward_into(&dy, &mut grad);
        }
    }
    if beta != 0.0 {
        let ctx = obj.context(net, sampling);
        for &r in rows {
            let (l, g) = obj.loss_and_grad(&ctx, &data.inputs[r])?;
            dl += l / n;
            if let Some(g) = g {
                grad.add_scaled(&g, beta / n);
            }
        }
    }
    Ok((grad, ce, dl))
}

/// Splits row indices into a training and a test part, deterministically.
fn split(len: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, 0)));
    let n_test = ((len as f64) * test_fraction).round().clamp(1.0, (len.max(2) - 1) as f64) as usize;
    let test = idx.split_off(len - n_test);
    (idx, test)
}

/// Mini-batch SGD on `net`. Returns the trained network and one report row
/// per epoch.
pub fn train(
    spec: &SpecFile,
    net: &DenseNetwork,
    data: &Dataset,
    ctx_file: &ContextFile,
    logic: Logic,
    cfg: &TrainConfig,
) -> Result<(DenseNetwork, TrainReport), TrainError> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(TrainError::Config("the dataset needs at least two rows".into()));
    }
    if data.input_dim() != net.input_dim() || data.output_dim() != net.output_dim() {
        return Err(TrainError::Spec(format!(
            "dataset is {} -> {} but the network is {} -> {}",
            data.input_dim(),
            data.output_dim(),
            net.input_dim(),
            net.output_dim()
        )));
    }
    let mut net = net.clone();
    let obj = Objective::new(spec, &net, ctx_file, logic)?;
    let (train_rows, test_rows) = split(data.len(), cfg.test_fraction, cfg.seed);
    let mut order_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2, 0));
    let log_sampling = SamplingConfig::new(cfg.dl_samples, derive_seed(cfg.seed, 3, 0), 0);
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut order = train_rows.clone();
        order.shuffle(&mut order_rng);
        for (batch, rows) in order.chunks(cfg.batch_size).enumerate() {
            let sampling = SamplingConfig::new(cfg.dl_samples, derive_seed(cfg.seed, epoch as u64, batch as u64), 0);
            let (grad, ce, dl) = obj_batch_gradient(&obj, &net, data, rows, cfg.alpha, cfg.beta, sampling)?;
            for (term, v) in [("cross-entropy", ce), ("logic", dl)] {
                if !v.is_finite() {
                    return Err(TrainError::NonFinite {
                        epoch,
                        batch,
                        term: term.into(),
                    });
                }
            }
            if grad.flatten().iter().any(|g| !g.is_finite()) {
                return Err(TrainError::NonFinite {
                    epoch,
                    batch,
                    term: "gradient".into(),
                });
            }
            net.apply_gradient(&grad, cfg.lr);
        }
        epochs.push(evaluate_epoch(&obj, &net, data, &train_rows, &test_rows, cfg, epoch, log_sampling)?);
    }
    let report = TrainReport {
        config: cfg.clone(),
        logic: logic.kind.name().to_string(),
        epochs,
    };
    Ok((net, report))
}

#[allow(clippy::too_many_arguments)]
fn evaluate_epoch(
    obj: &Objective<'_>,
    net: &DenseNetwork,
    data: &Dataset,
    train_rows: &[usize],
    test_rows: &[usize],
    cfg: &TrainConfig,
    epoch: usize,
    log_sampling: SamplingConfig,
) -> Result<EpochReport, TrainError> {
    let n = train_rows.len() as f64;
    let mut ce = 0.0;
    let mut dl = 0.0;
    let ctx = obj.context(net, log_sampling);
    for &r in train_rows {
        ce += cross_entropy(&net.forward(&data.inputs[r])?, &data.targets[r])? / n;
        dl += obj.loss(&ctx, &data.inputs[r])? / n;
    }
    let correct = test_rows
        .iter()
        .map(|&r| net.forward(&data.inputs[r]).map(|p| argmax(&p) == argmax(&data.targets[r])))
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let satisfaction = satisfaction(obj, net, data, test_rows, cfg)?;
    let total = cfg.alpha * ce + cfg.beta * dl;
    if !total.is_finite() {
        return Err(TrainError::NonFinite {
            epoch,
            batch: 0,
            term: "logged".into(),
        });
    }
    Ok(EpochReport {
        epoch,
        total,
        ce,
        dl,
        test_accuracy: correct as f64 / test_rows.len() as f64,
        satisfaction,
    })
}

/// Fraction of probe points at which the property holds classically. A
/// probe is a test input together with one fresh sample for every
/// infinitely quantified variable; the probes are the same every epoch.
fn satisfaction(
    obj: &Objective<'_>,
    net: &DenseNetwork,
    data: &Dataset,
    test_rows: &[usize],
    cfg: &TrainConfig,
) -> Result<f64, TrainError> {
    if cfg.eval_samples == 0 {
        return Ok(f64::NAN);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 4, 0));
    let mut good = 0usize;
    for k in 0..cfg.eval_samples {
        let r = test_rows[rng.random_range(0..test_rows.len())];
        let ctx = obj.context(net, SamplingConfig::new(1, derive_seed(cfg.seed, 5, k as u64), 0));
        good += usize::from(obj.holds(&ctx, &data.inputs[r])?);
    }
    Ok(good as f64 / cfg.eval_samples as f64)
}

/// Bindings for the robustness training spec: `eps`, `delta`, and a uniform
/// sampler on the `eps`-box for the perturbation `e`.
pub fn robustness_context(eps: f64, delta: f64) -> ContextFile {
    use ldl_core::net::Binding;
    use ldl_core::sampling::Distribution;
    ContextFile {
        samplers: BTreeMap::from([("e".to_string(), Distribution::uniform_cube(2, -eps, eps))]),
        bindings: BTreeMap::from([
            ("eps".to_string(), Binding::Scalar(eps)),
            ("delta".to_string(), Binding::Scalar(delta)),
        ]),
    }
}
