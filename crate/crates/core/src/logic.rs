//! The six differentiable logics: truth domains, constants, connectives and
//! comparisons.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::BuiltinOp;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicKind {
    Dl2,
    Godel,
    Lukasiewicz,
    Yager,
    Product,
    Stl,
}

impl LogicKind {
    pub const ALL: [LogicKind; 6] = [
        LogicKind::Dl2,
        LogicKind::Godel,
        LogicKind::Lukasiewicz,
        LogicKind::Yager,
        LogicKind::Product,
        LogicKind::Stl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LogicKind::Dl2 => "dl2",
            LogicKind::Godel => "godel",
            LogicKind::Lukasiewicz => "lukasiewicz",
            LogicKind::Yager => "yager",
            LogicKind::Product => "product",
            LogicKind::Stl => "stl",
        }
    }

    /// The four t-norm based logics with truth domain `[0, 1]`.
    pub fn is_fuzzy(self) -> bool {
        matches!(
            self,
            LogicKind::Godel | LogicKind::Lukasiewicz | LogicKind::Yager | LogicKind::Product
        )
    }
}

impl fmt::Display for LogicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogicKind {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LogicKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LogicError::InvalidParameter(format!("unknown logic `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LogicError {
    #[error("{value} is outside the truth domain of {logic}")]
    DomainViolation { value: f64, logic: LogicKind },
    #[error("{0} has no standalone negation; negations must be pushed to comparisons first")]
    NegationUnsupported(LogicKind),
    #[error("{0} implication must be rewritten into negation and disjunction first")]
    ImplicationUnsupported(LogicKind),
    #[error("connective applied to no arguments")]
    EmptyArguments,
    #[error("comparison operand {0} is not finite")]
    NonFinite(f64),
    #[error("`{0}` is not a comparison")]
    NotAComparison(&'static str),
    #[error("invalid logic parameter: {0}")]
    InvalidParameter(String),
}

/// A logic together with its numeric parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Logic {
    pub kind: LogicKind,
    /// Yager exponent, `p >= 1`.
    pub yager_p: f64,
    /// STL smoothing, `nu > 0`.
    pub stl_nu: f64,
    /// Penalty constant for `!=` under DL2 and STL, `xi > 0`.
    pub neq_xi: f64,
    /// Use `1 - max(tanh(a - b), 0)` for fuzzy `<=` instead of the
    /// symmetric `1 - max(tanh|a - b|, 0)`.
    pub leq_signed: bool,
}

impl Logic {
    pub fn new(kind: LogicKind) -> Self {
        Logic {
            kind,
            yager_p: 2.0,
            stl_nu: 1.0,
            neq_xi: 1.0,
            leq_signed: false,
        }
    }

    pub fn all() -> Vec<Logic> {
        LogicKind::ALL.into_iter().map(Logic::new).collect()
    }

    pub fn validate(&self) -> Result<(), LogicError> {
        if !(self.yager_p >= 1.0 && self.yager_p.is_finite()) {
            return Err(LogicError::InvalidParameter(format!("yager p must be >= 1, got {}", self.yager_p)));
        }
        if !(self.stl_nu > 0.0 && self.stl_nu.is_finite()) {
            return Err(LogicError::InvalidParameter(format!("stl nu must be > 0, got {}", self.stl_nu)));
        }
        if !(self.neq_xi > 0.0 && self.neq_xi.is_finite()) {
            return Err(LogicError::InvalidParameter(format!("neq xi must be > 0, got {}", self.neq_xi)));
        }
        Ok(())
    }

    pub fn top(&self) -> f64 {
        match self.kind {
            LogicKind::Dl2 => 0.0,
            LogicKind::Stl => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn bottom(&self) -> f64 {
        match self.kind {
            LogicKind::Dl2 | LogicKind::Stl => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }

    /// Closed truth domain `(lo, hi)`.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            LogicKind::Dl2 => (f64::NEG_INFINITY, 0.0),
            LogicKind::Stl => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, 1.0),
        }
    }

    pub fn in_domain(&self, v: f64) -> bool {
        let (lo, hi) = self.domain();
        v >= lo && v <= hi
    }

    fn check_domain(&self, v: f64) -> Result<f64, LogicError> {
        if self.in_domain(v) {
            Ok(v)
        } else {
            Err(LogicError::DomainViolation {
                value: v,
                logic: self.kind,
            })
        }
    }

    // ---- generic semantics ----

    pub fn and<R: Real>(&self, a: &R, b: &R) -> R {
        let one = || R::cst(1.0);
        let zero = || R::cst(0.0);
        match self.kind {
            LogicKind::Dl2 => a.add(b),
            LogicKind::Godel => a.min(b),
            LogicKind::Lukasiewicz => a.add(b).sub(&one()).max(&zero()),
            LogicKind::Yager => {
                let p = self.yager_p;
                let s = one().sub(a).powf(p).add(&one().sub(b).powf(p));
                one().sub(&s.powf(1.0 / p)).max(&zero())
            }
            LogicKind::Product => a.mul(b),
            LogicKind::Stl => R::and_stl(self.stl_nu, &[a.clone(), b.clone()]),
        }
    }

    pub fn or<R: Real>(&self, a: &R, b: &R) -> R {
        let one = || R::cst(1.0);
        match self.kind {
            LogicKind::Dl2 => R::cst(0.0).sub(&a.mul0(b)),
            LogicKind::Godel => a.max(b),
            LogicKind::Lukasiewicz => a.add(b).min(&one()),
            LogicKind::Yager => {
                let p = self.yager_p;
                a.powf(p).add(&b.powf(p)).powf(1.0 / p).min(&one())
            }
            LogicKind::Product => a.add(b).sub(&a.mul(b)),
            LogicKind::Stl => R::and_stl(self.stl_nu, &[a.neg(), b.neg()]).neg(),
        }
    }

    /// Conjunction of any nonempty list: one smooth node for STL, a left fold
    /// of the binary connective otherwise.
    pub fn and_n<R: Real>(&self, args: &[R]) -> R {
        assert!(!args.is_empty(), "conjunction of zero arguments");
        if self.kind == LogicKind::Stl {
            if args.len() == 1 {
                return args[0].clone();
            }
            return R::and_stl(self.stl_nu, args);
        }
        let mut acc = args[0].clone();
        for a in &args[1..] {
            acc = self.and(&acc, a);
        }
        acc
    }

    pub fn or_n<R: Real>(&self, args: &[R]) -> R {
        assert!(!args.is_empty(), "disjunction of zero arguments");
        if self.kind == LogicKind::Stl {
            if args.len() == 1 {
                return args[0].clone();
            }
            let negated: Vec<R> = args.iter().map(Real::neg).collect();
            return R::and_stl(self.stl_nu, &negated).neg();
        }
        let mut acc = args[0].clone();
        for a in &args[1..] {
            acc = self.or(&acc, a);
        }
        acc
    }

    pub fn not<R: Real>(&self, a: &R) -> Result<R, LogicError> {
        match self.kind {
            LogicKind::Dl2 => Err(LogicError::NegationUnsupported(self.kind)),
            LogicKind::Stl => Ok(a.neg()),
            _ => Ok(R::cst(1.0).sub(a)),
        }
    }

    pub fn implies<R: Real>(&self, a: &R, b: &R) -> Result<R, LogicError> {
        let one = || R::cst(1.0);
        Ok(match self.kind {
            LogicKind::Dl2 => return Err(LogicError::ImplicationUnsupported(self.kind)),
            LogicKind::Godel => one().sub(a).max(b),
            LogicKind::Lukasiewicz => one().sub(a).add(b).min(&one()),
            LogicKind::Yager => self.or(&one().sub(a), b),
            LogicKind::Product => one().sub(a).add(&a.mul(b)),
            LogicKind::Stl => self.or_n(&[a.neg(), b.clone()]),
        })
    }

    /// Truth value of `a op b` for a comparison operator.
    pub fn compare<R: Real>(&self, op: BuiltinOp, a: &R, b: &R) -> R {
        use BuiltinOp::*;
        let zero = || R::cst(0.0);
        let one = || R::cst(1.0);
        match op {
            Eq => match self.kind {
                LogicKind::Dl2 | LogicKind::Stl => zero().sub(&a.sub(b).abs()),
                _ => one().sub(&a.sub(b).abs().tanh()),
            },
            Leq => match self.kind {
                LogicKind::Dl2 => zero().sub(&a.sub(b).max(&zero())),
                LogicKind::Stl => b.sub(a),
                _ if self.leq_signed => one().sub(&a.sub(b).tanh().max(&zero())),
                _ => one().sub(&a.sub(b).abs().tanh().max(&zero())),
            },
            Neq => match self.kind {
                LogicKind::Dl2 | LogicKind::Stl => zero().sub(&R::cst(self.neq_xi).mul(&a.eq_ind(b))),
                _ => one().sub(&a.eq_ind(b)),
            },
            Geq => self.compare(Leq, b, a),
            Lt => self.and(&self.compare(Leq, a, b), &self.compare(Neq, a, b)),
            Gt => self.and(&self.compare(Geq, a, b), &self.compare(Neq, a, b)),
            other => panic!("`{}` is not a comparison", other.symbol()),
        }
    }

    /// Distance from full satisfaction: `0 - v` for DL2, `1 - v` for the
    /// fuzzy logics, `-v` for STL.
    pub fn penalty<R: Real>(&self, v: &R) -> R {
        match self.kind {
            LogicKind::Dl2 => R::cst(0.0).sub(v),
            LogicKind::Stl => v.neg(),
            _ => R::cst(1.0).sub(v),
        }
    }

    // ---- checked scalar interface ----

    pub fn interp_top(&self) -> f64 {
        self.top()
    }

    pub fn interp_bottom(&self) -> f64 {
        self.bottom()
    }

    fn checked_args(&self, args: &[f64]) -> Result<(), LogicError> {
        if args.is_empty() {
            return Err(LogicError::EmptyArguments);
        }
        for &a in args {
            self.check_domain(a)?;
        }
        Ok(())
    }

    pub fn interp_and(&self, args: &[f64]) -> Result<f64, LogicError> {
        self.checked_args(args)?;
        Ok(self.and_n(args))
    }

    pub fn interp_or(&self, args: &[f64]) -> Result<f64, LogicError> {
        self.checked_args(args)?;
        Ok(self.or_n(args))
    }

    pub fn interp_not(&self, a: f64) -> Result<f64, LogicError> {
        self.check_domain(a)?;
        self.not(&a)
    }

    pub fn interp_implies(&self, a: f64, b: f64) -> Result<f64, LogicError> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        self.implies(&a, &b)
    }

    pub fn interp_comparison(&self, op: BuiltinOp, a: f64, b: f64) -> Result<f64, LogicError> {
        if !op.is_comparison() {
            return Err(LogicError::NotAComparison(op.symbol()));
        }
        for v in [a, b] {
            if !v.is_finite() {
                return Err(LogicError::NonFinite(v));
            }
        }
        Ok(self.compare(op, &a, &b))
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LogicKind::Yager => write!(f, "yager(p={})", self.yager_p),
            LogicKind::Stl => write!(f, "stl(nu={})", self.stl_nu),
            k => write!(f, "{k}"),
        }
    }
}
