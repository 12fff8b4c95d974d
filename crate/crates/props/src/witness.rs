use std::fmt;

use ldl_core::ast::NetworkTypeCtx;
use ldl_core::classical::holds;
use ldl_core::eval::{evaluate, Output, SemanticContext};
use ldl_core::fmt::g;
use ldl_core::logic::Logic;
use ldl_core::parser::parse_expr;
use ldl_core::sampling::{Distribution, SamplingConfig};
use serde::{Deserialize, Serialize};

use crate::relative_deviation;
use crate::smoothness::{directional_derivative, Connective};

/// A concrete input at which a property was seen to fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `copies` conjuncts all equal to `value`.
    Idempotence { value: f64, copies: usize },
    /// Conjunction of `args` against conjunction of `args[permutation[k]]`.
    Commutativity { args: Vec<f64>, permutation: Vec<usize> },
    /// Binary nesting `(a ∧ b) ∧ c` against `a ∧ (b ∧ c)`.
    Associativity { a: f64, b: f64, c: f64 },
    /// `alpha · ∧(args)` against `∧(alpha · args)`.
    ScaleInvariance { alpha: f64, args: Vec<f64> },
    /// Forward difference of `∧(args)` along `coordinate`.
    ShadowLifting { args: Vec<f64>, coordinate: usize, step: f64 },
    /// Jump of the derivative of `connective` along `direction` between
    /// `point - width·direction` and `point + width·direction`.
    Kink {
        connective: Connective,
        point: Vec<f64>,
        direction: Vec<f64>,
        width: f64,
    },
    /// Two closed formulas that should agree, with the sampler of the
    /// quantified variable if there is one.
    QuantifierSwap {
        lhs: String,
        rhs: String,
        sampler: Option<(String, Distribution)>,
        sampling: SamplingConfig,
    },
    /// A ground formula whose value is top (or bottom) while it is
    /// classically false (or true).
    Unsound { formula: String },
}

impl Witness {
    /// Recomputes the violation under `logic`: the deviation between the two
    /// sides of the law, the partial derivative, the size of the jump, or
    /// 1 for a reproduced soundness violation (0 if it does not reproduce).
    pub fn replay(&self, logic: &Logic) -> f64 {
        match self {
            Witness::Idempotence { value, copies } => {
                relative_deviation(logic.and_n(&vec![*value; *copies]), *value)
            }
            Witness::Commutativity { args, permutation } => {
                let permuted: Vec<f64> = permutation.iter().map(|&k| args[k]).collect();
                relative_deviation(logic.and_n(args), logic.and_n(&permuted))
            }
            Witness::Associativity { a, b, c } => {
                relative_deviation(logic.and(&logic.and(a, b), c), logic.and(a, &logic.and(b, c)))
            }
            Witness::ScaleInvariance { alpha, args } => {
                let scaled: Vec<f64> = args.iter().map(|x| alpha * x).collect();
                relative_deviation(alpha * logic.and_n(args), logic.and_n(&scaled))
            }
            Witness::ShadowLifting { args, coordinate, step } => {
                let mut moved = args.clone();
                moved[*coordinate] += step;
                (logic.and_n(&moved) - logic.and_n(args)) / step
            }
            Witness::Kink {
                connective,
                point,
                direction,
                width,
            } => {
                let at = |s: f64| -> Vec<f64> { point.iter().zip(direction).map(|(p, d)| p + s * d).collect() };
                let left = directional_derivative(logic, *connective, &at(-width), direction);
                let right = directional_derivative(logic, *connective, &at(*width), direction);
                (right - left).abs()
            }
            Witness::QuantifierSwap {
                lhs,
                rhs,
                sampler,
                sampling,
            } => {
                let mut ctx = SemanticContext::new(*logic).with_sampling(*sampling);
                if let Some((name, dist)) = sampler {
                    ctx = ctx.with_sampler(name.clone(), dist.clone());
                }
                let value = |src: &str| match parse_expr(src, &NetworkTypeCtx::new(), &[])
                    .ok()
                    .and_then(|e| evaluate(&e, &ctx).ok())
                {
                    Some(Output::Truth(t)) => t,
                    _ => f64::NAN,
                };
                relative_deviation(value(lhs), value(rhs))
            }
            Witness::Unsound { formula } => {
                let Ok(e) = parse_expr(formula, &NetworkTypeCtx::new(), &[]) else {
                    return 0.0;
                };
                let ctx = SemanticContext::new(*logic);
                match (evaluate(&e, &ctx), holds(&e, &ctx, &[])) {
                    (Ok(Output::Truth(t)), Ok(c)) => {
                        let bad = (t == logic.top() && !c) || (logic.kind.is_fuzzy() && t == logic.bottom() && c);
                        if bad {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    _ => 0.0,
                }
            }
        }
    }
}

fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| g(*x, 6)).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Idempotence { value, copies } => write!(f, "a = {} repeated {copies} times", g(*value, 6)),
            Witness::Commutativity { args, permutation } => write!(f, "args {} permuted by {permutation:?}", list(args)),
            Witness::Associativity { a, b, c } => write!(f, "(a, b, c) = {}", list(&[*a, *b, *c])),
            Witness::ScaleInvariance { alpha, args } => write!(f, "alpha = {} on {}", g(*alpha, 6), list(args)),
            Witness::ShadowLifting { args, coordinate, step } => {
                write!(f, "d/dA{coordinate} at {} (step {})", list(args), g(*step, 3))
            }
            Witness::Kink {
                connective,
                point,
                direction,
                ..
            } => write!(f, "{connective} at {} along {}", list(point), list(direction)),
            Witness::QuantifierSwap { lhs, rhs, .. } => write!(f, "`{lhs}` vs `{rhs}`"),
            Witness::Unsound { formula } => write!(f, "`{formula}`"),
        }
    }
}
