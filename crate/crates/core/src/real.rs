//! Scalar abstraction shared by plain evaluation, gradient tapes and graph
//! compilation.
//!
//! Logic semantics are written once, generically over [`Real`], as straight
//! sequences of primitive operations. Every value-dependent branch lives
//! inside a primitive, which keeps direct evaluation and compiled graphs
//! bit-identical.

use std::sync::Arc;

use crate::net::DenseNetwork;

pub trait Real: Clone + std::fmt::Debug {
    fn cst(v: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn exp(&self) -> Self;
    fn tanh(&self) -> Self;
    fn abs(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn max(&self, o: &Self) -> Self;
    fn min(&self, o: &Self) -> Self;
    /// Product where `0 * ±inf` is `0` instead of NaN.
    fn mul0(&self, o: &Self) -> Self;
    /// `1` when both operands are exactly equal, else `0`.
    fn eq_ind(&self, o: &Self) -> Self;
    /// The smooth n-ary conjunction of signal temporal logic.
    fn and_stl(nu: f64, args: &[Self]) -> Self;
}

/// A scalar whose value is known eagerly, so it can drive sampling, network
/// execution and control decisions.
pub trait NumericReal: Real {
    fn value(&self) -> f64;
    fn apply_network(name: &str, net: &Arc<DenseNetwork>, input: &[Self]) -> Vec<Self>;

    /// Whether the winning sample of an infinite quantifier has to be
    /// evaluated again to connect it to the caller (true for tapes).
    const REPLAY: bool = false;

    /// Marks the start of a throwaway computation, such as scoring one sample.
    fn scratch_begin() -> usize {
        0
    }

    /// Discards everything recorded since the matching [`Self::scratch_begin`].
    fn scratch_end(_mark: usize) {}
}

pub mod prim {
    //! The f64 definitions of every primitive. Other scalar types must agree
    //! with these on values.

    pub fn max(a: f64, b: f64) -> f64 {
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn min(a: f64, b: f64) -> f64 {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn mul0(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            a * b
        }
    }

    pub fn eq_ind(a: f64, b: f64) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }
}

/// The smooth conjunction of signal temporal logic over extended reals.
///
/// With `m` the minimum and `r_i = (v_i - m) / m`: for `m < 0` the result is
/// `sum(m e^{r_i} e^{nu r_i}) / sum(e^{nu r_i})`, for `m > 0` it is
/// `sum(v_i e^{-nu r_i}) / sum(e^{-nu r_i})`, and `0` when `m = 0`. Infinite
/// arguments are taken in the limit: any `-inf` gives `-inf`, `+inf`
/// arguments drop out, and all-`+inf` gives `+inf`.
pub fn and_stl_kernel<R: NumericReal>(nu: f64, args: &[R]) -> R {
    assert!(!args.is_empty(), "conjunction of zero arguments");
    if args.iter().any(|a| a.value() == f64::NEG_INFINITY) {
        return R::cst(f64::NEG_INFINITY);
    }
    let finite: Vec<&R> = args.iter().filter(|a| a.value() != f64::INFINITY).collect();
    if finite.is_empty() {
        return R::cst(f64::INFINITY);
    }
    let mut kmin = 0;
    for (k, a) in finite.iter().enumerate() {
        if a.value() < finite[kmin].value() {
            kmin = k;
        }
    }
    let vmin = finite[kmin];
    let m = vmin.value();
    if m == 0.0 {
        return R::cst(0.0);
    }
    let nu_c = R::cst(nu);
    let rel: Vec<R> = finite.iter().map(|v| v.sub(vmin).div(vmin)).collect();
    let mut num = R::cst(0.0);
    let mut den = R::cst(0.0);
    if m < 0.0 {
        for r in &rel {
            let w = nu_c.mul(r).exp();
            num = num.add(&vmin.mul(&r.exp()).mul(&w));
            den = den.add(&w);
        }
    } else {
        for (v, r) in finite.iter().zip(&rel) {
            let w = nu_c.mul(r).neg().exp();
            num = num.add(&v.mul(&w));
            den = den.add(&w);
        }
    }
    num.div(&den)
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn max(&self, o: &Self) -> Self {
        prim::max(*self, *o)
    }
    fn min(&self, o: &Self) -> Self {
        prim::min(*self, *o)
    }
    fn mul0(&self, o: &Self) -> Self {
        prim::mul0(*self, *o)
    }
    fn eq_ind(&self, o: &Self) -> Self {
        prim::eq_ind(*self, *o)
    }
    fn and_stl(nu: f64, args: &[Self]) -> Self {
        and_stl_kernel(nu, args)
    }
}

impl NumericReal for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn apply_network(_name: &str, net: &Arc<DenseNetwork>, input: &[Self]) -> Vec<Self> {
        net.forward(input).expect("network input dimension checked by the typechecker")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stl_conjunction_cases() {
        assert_eq!(and_stl_kernel(1.0, &[-1.0, -1.0]), -1.0);
        assert_eq!(and_stl_kernel(3.0, &[0.0, 5.0]), 0.0);
        assert_eq!(and_stl_kernel(1.0, &[2.0, 2.0, 2.0]), 2.0);
        assert_eq!(and_stl_kernel(1.0, &[f64::INFINITY, 2.0]), 2.0);
        assert_eq!(and_stl_kernel(1.0, &[f64::INFINITY, f64::INFINITY]), f64::INFINITY);
        assert_eq!(and_stl_kernel(1.0, &[f64::NEG_INFINITY, 2.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn stl_conjunction_positive_branch_by_hand() {
        // m = 1, r = (0, 1): (1 + 2 e^{-1}) / (1 + e^{-1})
        let e = (-1.0f64).exp();
        let want = (1.0 + 2.0 * e) / (1.0 + e);
        assert!((and_stl_kernel(1.0, &[1.0, 2.0]) - want).abs() < 1e-15);
    }

    #[test]
    fn stl_conjunction_negative_branch_by_hand() {
        // m = -2, r = (0, (1 - -2) / -2) = (0, -1.5), nu = 1
        let r: f64 = -1.5;
        let want = (-2.0 + -2.0 * r.exp() * r.exp()) / (1.0 + r.exp());
        assert!((and_stl_kernel(1.0, &[-2.0, 1.0]) - want).abs() < 1e-15);
    }

    #[test]
    fn mul0_absorbs_infinity() {
        assert_eq!(prim::mul0(0.0, f64::NEG_INFINITY), 0.0);
        assert_eq!(prim::mul0(-1.0, f64::NEG_INFINITY), f64::INFINITY);
    }
}
