//! External artifacts: dense networks (`.net`), quantifier contexts (`.ctx`)
//! and datasets (`.csv`).

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{Distribution, SamplingError};

pub const NET_FORMAT: &str = "ldl-dense-v1";

#[derive(Debug, Error)]
pub enum NetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
    #[error("layer {layer}: {message}")]
    LayerShape { layer: usize, message: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

fn io_err(path: &Path, source: std::io::Error) -> NetError {
    NetError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
    Softmax,
}

impl Activation {
    pub fn parse(s: &str) -> Result<Self, NetError> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            "softmax" => Ok(Activation::Softmax),
            other => Err(NetError::UnknownActivation(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Layer {
    #[serde(rename = "in")]
    pub input: usize,
    #[serde(rename = "out")]
    pub output: usize,
    pub activation: Activation,
    /// Row-major `output x input` matrix.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(input: usize, output: usize, activation: Activation, weights: Vec<f64>, bias: Vec<f64>) -> Self {
        Layer {
            input,
            output,
            activation,
            weights,
            bias,
        }
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output)
            .map(|o| {
                let row = &self.weights[o * self.input..(o + 1) * self.input];
                row.iter().zip(x).fold(self.bias[o], |acc, (w, v)| acc + w * v)
            })
            .collect()
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn activate(a: Activation, z: &[f64]) -> Vec<f64> {
    match a {
        Activation::Relu => z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect(),
        Activation::Identity => z.to_vec(),
        Activation::Softmax => softmax(z),
    }
}

#[derive(Deserialize)]
struct RawLayer {
    #[serde(rename = "in")]
    input: usize,
    #[serde(rename = "out")]
    output: usize,
    activation: String,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNet {
    format: String,
    input_dim: usize,
    layers: Vec<RawLayer>,
}

#[derive(Serialize)]
struct NetOut<'a> {
    format: &'a str,
    input_dim: usize,
    layers: &'a [Layer],
}

/// A feed-forward network of dense layers.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<Layer>,
}

/// Gradient of a scalar with respect to every layer's weights and bias.
#[derive(Clone, Debug, PartialEq)]
pub struct NetGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl NetGradient {
    pub fn zeros(net: &DenseNetwork) -> Self {
        NetGradient {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &NetGradient, s: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
    }

    /// Flattened in the same order as [`DenseNetwork::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.bias) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl DenseNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::Malformed("network has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            let shape = |message: String| NetError::LayerShape { layer: i, message };
            if l.input == 0 || l.output == 0 {
                return Err(shape("layer dimensions must be positive".into()));
            }
            if l.weights.len() != l.input * l.output {
                return Err(shape(format!(
                    "weights have {} entries, expected {} x {}",
                    l.weights.len(),
                    l.output,
                    l.input
                )));
            }
            if l.bias.len() != l.output {
                return Err(shape(format!("bias has {} entries, expected {}", l.bias.len(), l.output)));
            }
            if i > 0 && layers[i - 1].output != l.input {
                return Err(shape(format!(
                    "input size {} does not match previous output size {}",
                    l.input,
                    layers[i - 1].output
                )));
            }
            if l.activation == Activation::Softmax && i + 1 != layers.len() {
                return Err(shape("softmax is only allowed on the final layer".into()));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(shape("parameters must be finite".into()));
            }
        }
        Ok(DenseNetwork { layers })
    }

    /// `n -> n` network computing the identity.
    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        (0..n).for_each(|i| w[i * n + i] = 1.0);
        DenseNetwork::new(vec![Layer::new(n, n, Activation::Identity, w, vec![0.0; n])])
            .expect("identity network is well formed")
    }

    /// Network with the given layer sizes and activations, parameters drawn
    /// uniformly from `[-scale, scale]`.
    pub fn random(seed: u64, sizes: &[usize], activations: &[Activation], scale: f64) -> Result<Self, NetError> {
        assert_eq!(sizes.len(), activations.len() + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &a)| {
                let weights = (0..w[0] * w[1]).map(|_| rng.random_range(-scale..=scale)).collect();
                let bias = (0..w[1]).map(|_| rng.random_range(-scale..=scale)).collect();
                Layer::new(w[0], w[1], a, weights, bias)
            })
            .collect();
        DenseNetwork::new(layers)
    }

    pub fn from_json_str(s: &str) -> Result<Self, NetError> {
        let raw: RawNet = serde_json::from_str(s).map_err(|e| NetError::Malformed(e.to_string()))?;
        if raw.format != NET_FORMAT {
            return Err(NetError::Malformed(format!(
                "unsupported format `{}`, expected `{NET_FORMAT}`",
                raw.format
            )));
        }
        let layers = raw
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer::new(
                    l.input,
                    l.output,
                    Activation::parse(&l.activation)?,
                    l.weights,
                    l.bias,
                ))
            })
            .collect::<Result<Vec<_>, NetError>>()?;
        let net = DenseNetwork::new(layers)?;
        if net.input_dim() != raw.input_dim {
            return Err(NetError::LayerShape {
                layer: 0,
                message: format!(
                    "input size {} does not match declared input_dim {}",
                    net.input_dim(),
                    raw.input_dim
                ),
            });
        }
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&NetOut {
            format: NET_FORMAT,
            input_dim: self.input_dim(),
            layers: &self.layers,
        })
        .expect("network serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| io_err(path, e))
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.num_params());
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    /// Gradient step `params -= lr * grad`.
    pub fn apply_gradient(&mut self, grad: &NetGradient, lr: f64) {
        for (l, (gw, gb)) in self.layers.iter_mut().zip(grad.weights.iter().zip(&grad.bias)) {
            l.weights.iter_mut().zip(gw).for_each(|(w, g)| *w -= lr * g);
            l.bias.iter_mut().zip(gb).for_each(|(b, g)| *b -= lr * g);
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NetError> {
        if x.len() == self.input_dim() {
            Ok(())
        } else {
            Err(NetError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            })
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(x)?;
        let mut h = x.to_vec();
        for l in &self.layers {
            h = activate(l.activation, &l.pre_activation(&h));
        }
        Ok(h)
    }

    /// Forward pass that records what reverse accumulation needs.
    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace<'_>, NetError> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for l in &self.layers {
            let z = l.pre_activation(&h);
            let a = activate(l.activation, &z);
            inputs.push(h);
            pre.push(z);
            h = a;
        }
        Ok(ForwardTrace {
            net: self,
            inputs,
            pre,
            output: h,
        })
    }

    /// Output together with a trace able to produce gradients.
    pub fn forward_with_gradient(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardTrace<'_>), NetError> {
        let t = self.forward_trace(x)?;
        Ok((t.output.clone(), t))
    }
}

/// Recorded forward pass of a [`DenseNetwork`].
#[derive(Clone, Debug)]
pub struct ForwardTrace<'a> {
    net: &'a DenseNetwork,
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardTrace<'_> {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// Given `dy = dL/d output`, returns `dL/d input` and accumulates
    /// `dL/d params` into `grad`. The relu subgradient at 0 is 0.
    pub fn backward_into(&self, dy: &[f64], grad: &mut NetGradient) -> Vec<f64> {
        assert_eq!(dy.len(), self.output.len());
        let mut delta = dy.to_vec();
        for (k, l) in self.net.layers.iter().enumerate().rev() {
            let z = &self.pre[k];
            let dz: Vec<f64> = match l.activation {
                Activation::Identity => delta,
                Activation::Relu => z
                    .iter()
                    .zip(&delta)
                    .map(|(&zi, &d)| if zi > 0.0 { d } else { 0.0 })
                    .collect(),
                Activation::Softmax => {
                    let s = softmax(z);
                    let dot: f64 = s.iter().zip(&delta).map(|(a, b)| a * b).sum();
                    s.iter().zip(&delta).map(|(si, d)| si * (d - dot)).collect()
                }
            };
            let x = &self.inputs[k];
            for o in 0..l.output {
                if dz[o] == 0.0 {
                    continue;
                }
                grad.bias[k][o] += dz[o];
                let row = &mut grad.weights[k][o * l.input..(o + 1) * l.input];
                row.iter_mut().zip(x).for_each(|(g, xi)| *g += dz[o] * xi);
            }
            delta = (0..l.input)
                .map(|i| (0..l.output).map(|o| l.weights[o * l.input + i] * dz[o]).sum())
                .collect();
        }
        delta
    }

    pub fn backward(&self, dy: &[f64]) -> (Vec<f64>, NetGradient) {
        let mut g = NetGradient::zeros(self.net);
        let dx = self.backward_into(dy, &mut g);
        (dx, g)
    }

    /// `J[j][i] = d output_j / d input_i`.
    pub fn jacobian(&self) -> Vec<Vec<f64>> {
        (0..self.output.len())
            .map(|j| {
                let mut e = vec![0.0; self.output.len()];
                e[j] = 1.0;
                self.backward(&e).0
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// context files

/// Initial value of a root parameter supplied by a context file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Binding {
    Bool(bool),
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Comp {
    One(f64),
    Many(Vec<f64>),
}

impl Comp {
    fn expand(self, dim: Option<usize>, field: &str) -> Result<Vec<f64>, NetError> {
        match (self, dim) {
            (Comp::One(v), Some(d)) => Ok(vec![v; d]),
            (Comp::One(v), None) => Ok(vec![v]),
            (Comp::Many(vs), Some(d)) if vs.len() != d => Err(NetError::Invalid(format!(
                "`{field}` has {} components but dim is {d}",
                vs.len()
            ))),
            (Comp::Many(vs), _) => Ok(vs),
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawSampler {
    Uniform { lo: Comp, hi: Comp, dim: Option<usize> },
    Gaussian { mean: Comp, stddev: Comp, dim: Option<usize> },
    Empirical { points: Vec<Comp> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContext {
    #[serde(default)]
    samplers: BTreeMap<String, RawSampler>,
    #[serde(default)]
    bindings: BTreeMap<String, Binding>,
}

/// Contents of a `.ctx` file: distributions for infinitely quantified
/// variables and values for the root property's parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContextFile {
    pub samplers: BTreeMap<String, Distribution>,
    pub bindings: BTreeMap<String, Binding>,
}

impl ContextFile {
    pub fn from_json_str(s: &str) -> Result<Self, NetError> {
        if s.trim().is_empty() {
            return Ok(ContextFile::default());
        }
        let raw: RawContext = serde_json::from_str(s).map_err(|e| NetError::Malformed(e.to_string()))?;
        let mut samplers = BTreeMap::new();
        for (name, r) in raw.samplers {
            let d = match r {
                RawSampler::Uniform { lo, hi, dim } => {
                    let lo = lo.expand(dim, "lo")?;
                    let hi = hi.expand(dim.or(Some(lo.len())), "hi")?;
                    Distribution::Uniform { lo, hi }
                }
                RawSampler::Gaussian { mean, stddev, dim } => {
                    let mean = mean.expand(dim, "mean")?;
                    let stddev = stddev.expand(dim.or(Some(mean.len())), "stddev")?;
                    Distribution::Gaussian { mean, stddev }
                }
                RawSampler::Empirical { points } => Distribution::Empirical {
                    points: points
                        .into_iter()
                        .map(|p| p.expand(None, "points"))
                        .collect::<Result<_, _>>()?,
                },
            };
            d.validate()
                .map_err(|e| NetError::Invalid(format!("sampler `{name}`: {e}")))?;
            samplers.insert(name, d);
        }
        Ok(ContextFile {
            samplers,
            bindings: raw.bindings,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json_str(&text)
    }
}

// ---------------------------------------------------------------------------
// datasets

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self, NetError> {
        let m = inputs.first().map_or(0, Vec::len);
        let n = targets.first().map_or(0, Vec::len);
        let ds = Dataset {
            input_names: (0..m).map(|i| format!("x{i}")).collect(),
            output_names: (0..n).map(|i| format!("y{i}")).collect(),
            inputs,
            targets,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_names.len()
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.inputs.len() != self.targets.len() {
            return Err(NetError::Invalid("inputs and targets differ in length".into()));
        }
        for (r, (x, y)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if x.len() != self.input_dim() || y.len() != self.output_dim() {
                return Err(NetError::Invalid(format!("row {r} has inconsistent dimensions")));
            }
            if x.iter().chain(y).any(|v| !v.is_finite()) {
                return Err(NetError::Invalid(format!("row {r} has a non-finite entry")));
            }
            let s: f64 = y.iter().sum();
            if y.iter().any(|&v| v < 0.0) || (s - 1.0).abs() > 1e-9 {
                return Err(NetError::Invalid(format!(
                    "row {r}: label is not a probability vector (sum {s})"
                )));
            }
        }
        Ok(())
    }

    /// Reads a CSV whose header names input columns `x0, x1, ...` and output
    /// columns `y0, y1, ...`, in any order.
    pub fn from_csv_reader(reader: impl std::io::Read) -> Result<Self, NetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| NetError::Malformed(e.to_string()))?.clone();
        let mut xs: Vec<(usize, usize)> = Vec::new();
        let mut ys: Vec<(usize, usize)> = Vec::new();
        for (col, h) in header.iter().enumerate() {
            let parsed = h.get(1..).and_then(|s| s.parse::<usize>().ok());
            match (h.chars().next(), parsed) {
                (Some('x'), Some(i)) => xs.push((i, col)),
                (Some('y'), Some(i)) => ys.push((i, col)),
                _ => return Err(NetError::Malformed(format!("unrecognised column `{h}`"))),
            }
        }
        xs.sort();
        ys.sort();
        for (list, prefix) in [(&xs, 'x'), (&ys, 'y')] {
            if list.is_empty() || list.iter().enumerate().any(|(k, &(i, _))| k != i) {
                return Err(NetError::Malformed(format!(
                    "columns {prefix}0..{prefix}N must be present without gaps"
                )));
            }
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| NetError::Malformed(e.to_string()))?;
            let get = |col: usize| -> Result<f64, NetError> {
                rec.get(col)
                    .ok_or_else(|| NetError::Malformed("short row".into()))?
                    .parse::<f64>()
                    .map_err(|e| NetError::Malformed(e.to_string()))
            };
            inputs.push(xs.iter().map(|&(_, c)| get(c)).collect::<Result<Vec<_>, _>>()?);
            targets.push(ys.iter().map(|&(_, c)| get(c)).collect::<Result<Vec<_>, _>>()?);
        }
        let ds = Dataset {
            input_names: xs.iter().map(|(i, _)| format!("x{i}")).collect(),
            output_names: ys.iter().map(|(i, _)| format!("y{i}")).collect(),
            inputs,
            targets,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, NetError> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
        Self::from_csv_reader(f)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = self
            .input_names
            .iter()
            .chain(&self.output_names)
            .map(String::as_str)
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            let row: Vec<String> = x.iter().chain(y).map(|v| crate::fmt::g17(*v)).collect();
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), NetError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| io_err(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_forward() {
        let net = DenseNetwork::identity(2);
        assert_eq!(net.forward(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let (_, t) = net.forward_with_gradient(&[3.0, -1.0]).unwrap();
        assert_eq!(t.jacobian(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn relu_clips() {
        let net = DenseNetwork::new(vec![Layer::new(1, 1, Activation::Relu, vec![1.0], vec![-2.0])]).unwrap();
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn scalar_linear_weight_gradient() {
        let net = DenseNetwork::new(vec![Layer::new(1, 1, Activation::Identity, vec![0.7], vec![0.0])]).unwrap();
        let (_, t) = net.forward_with_gradient(&[2.5]).unwrap();
        let (dx, g) = t.backward(&[1.0]);
        assert_eq!(g.weights[0], vec![2.5]);
        assert_eq!(dx, vec![0.7]);
    }

    #[test]
    fn chain_mismatch_rejected() {
        let l1 = Layer::new(2, 4, Activation::Relu, vec![0.0; 8], vec![0.0; 4]);
        let l2 = Layer::new(2, 3, Activation::Identity, vec![0.0; 6], vec![0.0; 3]);
        assert!(matches!(DenseNetwork::new(vec![l1, l2]), Err(NetError::LayerShape { layer: 1, .. })));
    }

    #[test]
    fn softmax_only_last() {
        let l1 = Layer::new(2, 2, Activation::Softmax, vec![0.0; 4], vec![0.0; 2]);
        let l2 = Layer::new(2, 2, Activation::Identity, vec![0.0; 4], vec![0.0; 2]);
        assert!(DenseNetwork::new(vec![l1, l2]).is_err());
    }

    #[test]
    fn json_roundtrip_and_unknown_activation() {
        let net = DenseNetwork::random(3, &[3, 4, 2], &[Activation::Relu, Activation::Softmax], 1.0).unwrap();
        let back = DenseNetwork::from_json_str(&net.to_json_string()).unwrap();
        assert_eq!(net, back);
        let bad = net.to_json_string().replace("relu", "gelu");
        assert!(matches!(DenseNetwork::from_json_str(&bad), Err(NetError::UnknownActivation(a)) if a == "gelu"));
    }

    #[test]
    fn context_broadcast_and_validation() {
        let ctx = ContextFile::from_json_str(
            r#"{"samplers": {"x": {"kind": "uniform", "lo": 0.0, "hi": 1.0, "dim": 3}},
                "bindings": {"eps": 0.1, "xhat": [1.0, 2.0, 3.0], "flag": true}}"#,
        )
        .unwrap();
        assert_eq!(ctx.samplers["x"], Distribution::uniform_cube(3, 0.0, 1.0));
        assert_eq!(ctx.bindings["eps"], Binding::Scalar(0.1));
        assert_eq!(ctx.bindings["xhat"], Binding::Vector(vec![1.0, 2.0, 3.0]));
        assert_eq!(ctx.bindings["flag"], Binding::Bool(true));
        let neg = ContextFile::from_json_str(r#"{"samplers": {"x": {"kind": "gaussian", "mean": 0.0, "stddev": -1.0}}}"#);
        assert!(neg.is_err());
        assert_eq!(ContextFile::from_json_str("").unwrap(), ContextFile::default());
    }

    #[test]
    fn csv_roundtrip() {
        let ds = Dataset::new(vec![vec![0.5, -1.0], vec![2.0, 0.25]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let back = Dataset::from_csv_reader(ds.to_csv_string().as_bytes()).unwrap();
        assert_eq!(ds, back);
        let bad = "x0,y0,y1\n1.0,0.5,0.6\n";
        assert!(Dataset::from_csv_reader(bad.as_bytes()).is_err());
    }
}
