//! Reverse-mode differentiation on a thread-local tape.
//!
//! Each [`TapeVar`] records its local partial derivatives when it is
//! created. Subgradients: `max`, `min` and `abs` give 0 at ties and kinks,
//! relu gives 0 at 0, and any non-finite local partial is recorded as 0.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::net::{DenseNetwork, NetGradient};
use crate::real::{and_stl_kernel, prim, NumericReal, Real};

#[derive(Clone, Debug)]
enum Node {
    Leaf,
    Unary(usize, f64),
    Binary(usize, f64, usize, f64),
    /// Output `k` of network call `call`.
    NetOut { call: usize, k: usize },
}

struct NetCall {
    name: String,
    net: Arc<DenseNetwork>,
    inputs: Vec<usize>,
    input_values: Vec<f64>,
    first_output: usize,
}

#[derive(Default)]
struct Tape {
    nodes: Vec<Node>,
    calls: Vec<NetCall>,
}

thread_local! {
    static TAPE: RefCell<Tape> = RefCell::new(Tape::default());
}

fn push(node: Node) -> usize {
    TAPE.with(|t| {
        let mut t = t.borrow_mut();
        t.nodes.push(node);
        t.nodes.len() - 1
    })
}

fn clean(d: f64) -> f64 {
    if d.is_finite() {
        d
    } else {
        0.0
    }
}

/// Clears the current thread's tape. Existing variables become invalid.
pub fn reset() {
    TAPE.with(|t| {
        let mut t = t.borrow_mut();
        t.nodes.clear();
        t.calls.clear();
    })
}

/// Current tape length, for use with [`rewind`].
pub fn checkpoint() -> usize {
    TAPE.with(|t| t.borrow().nodes.len())
}

/// Drops every node recorded after `mark`. Variables created after the
/// checkpoint must no longer be used.
pub fn rewind(mark: usize) {
    TAPE.with(|t| {
        let mut t = t.borrow_mut();
        t.nodes.truncate(mark);
        while t.calls.last().is_some_and(|c| c.first_output >= mark) {
            t.calls.pop();
        }
    })
}

#[derive(Clone, Copy, Debug)]
pub struct TapeVar {
    idx: usize,
    val: f64,
}

impl TapeVar {
    /// A fresh independent variable.
    pub fn leaf(v: f64) -> Self {
        TapeVar {
            idx: push(Node::Leaf),
            val: v,
        }
    }

    fn unary(val: f64, a: &TapeVar, da: f64) -> Self {
        TapeVar {
            idx: push(Node::Unary(a.idx, clean(da))),
            val,
        }
    }

    fn binary(val: f64, a: &TapeVar, da: f64, b: &TapeVar, db: f64) -> Self {
        TapeVar {
            idx: push(Node::Binary(a.idx, clean(da), b.idx, clean(db))),
            val,
        }
    }

    pub fn index(&self) -> usize {
        self.idx
    }
}

/// Adjoints of one backward pass.
#[derive(Clone, Debug)]
pub struct Gradients {
    adjoints: Vec<f64>,
    pub networks: BTreeMap<String, NetGradient>,
}

impl Gradients {
    pub fn wrt(&self, v: &TapeVar) -> f64 {
        self.adjoints.get(v.idx).copied().unwrap_or(0.0)
    }

    pub fn network(&self, name: &str) -> Option<&NetGradient> {
        self.networks.get(name)
    }
}

/// Back-propagates from `output` through the whole current tape.
pub fn backward(output: &TapeVar) -> Gradients {
    TAPE.with(|t| {
        let t = t.borrow();
        let n = t.nodes.len();
        let mut adj = vec![0.0; n];
        let mut networks: BTreeMap<String, NetGradient> = BTreeMap::new();
        adj[output.idx] = 1.0;
        for i in (0..=output.idx).rev() {
            match t.nodes[i] {
                Node::Leaf => {}
                Node::Unary(a, da) => {
                    let g = adj[i];
                    if g != 0.0 {
                        adj[a] += g * da;
                    }
                }
                Node::Binary(a, da, b, db) => {
                    let g = adj[i];
                    if g != 0.0 {
                        adj[a] += g * da;
                        adj[b] += g * db;
                    }
                }
                Node::NetOut { call, k } => {
                    if k != 0 {
                        continue;
                    }
                    let c = &t.calls[call];
                    let nout = c.net.output_dim();
                    let dy = &adj[c.first_output..c.first_output + nout];
                    if dy.iter().all(|&d| d == 0.0) {
                        continue;
                    }
                    let dy = dy.to_vec();
                    let trace = c.net.forward_trace(&c.input_values).expect("recorded input fits");
                    let grad = networks
                        .entry(c.name.clone())
                        .or_insert_with(|| NetGradient::zeros(&c.net));
                    let dx = trace.backward_into(&dy, grad);
                    for (&inp, d) in c.inputs.iter().zip(dx) {
                        adj[inp] += d;
                    }
                }
            }
        }
        Gradients {
            adjoints: adj,
            networks,
        }
    })
}

impl Real for TapeVar {
    fn cst(v: f64) -> Self {
        TapeVar::leaf(v)
    }
    fn add(&self, o: &Self) -> Self {
        TapeVar::binary(self.val + o.val, self, 1.0, o, 1.0)
    }
    fn sub(&self, o: &Self) -> Self {
        TapeVar::binary(self.val - o.val, self, 1.0, o, -1.0)
    }
    fn mul(&self, o: &Self) -> Self {
        TapeVar::binary(self.val * o.val, self, o.val, o, self.val)
    }
    fn div(&self, o: &Self) -> Self {
        let v = self.val / o.val;
        TapeVar::binary(v, self, 1.0 / o.val, o, -v / o.val)
    }
    fn neg(&self) -> Self {
        TapeVar::unary(-self.val, self, -1.0)
    }
    fn exp(&self) -> Self {
        let v = self.val.exp();
        TapeVar::unary(v, self, v)
    }
    fn tanh(&self) -> Self {
        let v = self.val.tanh();
        TapeVar::unary(v, self, 1.0 - v * v)
    }
    fn abs(&self) -> Self {
        let d = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        TapeVar::unary(self.val.abs(), self, d)
    }
    fn powf(&self, p: f64) -> Self {
        TapeVar::unary(self.val.powf(p), self, p * self.val.powf(p - 1.0))
    }
    fn max(&self, o: &Self) -> Self {
        let (da, db) = if self.val > o.val {
            (1.0, 0.0)
        } else if self.val < o.val {
            (0.0, 1.0)
        } else {
            (0.0, 0.0)
        };
        TapeVar::binary(prim::max(self.val, o.val), self, da, o, db)
    }
    fn min(&self, o: &Self) -> Self {
        let (da, db) = if self.val < o.val {
            (1.0, 0.0)
        } else if self.val > o.val {
            (0.0, 1.0)
        } else {
            (0.0, 0.0)
        };
        TapeVar::binary(prim::min(self.val, o.val), self, da, o, db)
    }
    fn mul0(&self, o: &Self) -> Self {
        TapeVar::binary(prim::mul0(self.val, o.val), self, o.val, o, self.val)
    }
    fn eq_ind(&self, o: &Self) -> Self {
        TapeVar::binary(prim::eq_ind(self.val, o.val), self, 0.0, o, 0.0)
    }
    fn and_stl(nu: f64, args: &[Self]) -> Self {
        and_stl_kernel(nu, args)
    }
}

impl NumericReal for TapeVar {
    const REPLAY: bool = true;

    fn value(&self) -> f64 {
        self.val
    }

    fn scratch_begin() -> usize {
        checkpoint()
    }

    fn scratch_end(mark: usize) {
        rewind(mark)
    }

    fn apply_network(name: &str, net: &Arc<DenseNetwork>, input: &[Self]) -> Vec<Self> {
        let input_values: Vec<f64> = input.iter().map(|v| v.val).collect();
        let out = net
            .forward(&input_values)
            .expect("network input dimension checked by the typechecker");
        TAPE.with(|t| {
            let mut t = t.borrow_mut();
            let call = t.calls.len();
            let first_output = t.nodes.len();
            t.calls.push(NetCall {
                name: name.to_string(),
                net: Arc::clone(net),
                inputs: input.iter().map(|v| v.idx).collect(),
                input_values,
                first_output,
            });
            out.iter()
                .enumerate()
                .map(|(k, &val)| {
                    t.nodes.push(Node::NetOut { call, k });
                    TapeVar {
                        idx: t.nodes.len() - 1,
                        val,
                    }
                })
                .collect()
        })
    }
}
