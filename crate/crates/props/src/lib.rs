//! Empirical checks of the properties a differentiable logic may have:
//! algebraic laws of its conjunction, shadow-lifting, weak smoothness,
//! quantifier commutativity and soundness with respect to classical logic.
//!
//! Every check is seeded. A failing verdict carries a [`Witness`] whose
//! [`Witness::replay`] recomputes the reported magnitude.

use std::fmt;
use std::str::FromStr;

use ldl_core::logic::{Logic, LogicKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod algebraic;
pub mod quantifiers;
pub mod shadow;
pub mod smoothness;
pub mod soundness;
mod witness;

pub use witness::Witness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Idempotence,
    Commutativity,
    Associativity,
    ScaleInvariance,
    ShadowLifting,
    WeakSmoothness,
    QuantifierCommutativity,
    Soundness,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::WeakSmoothness,
        Property::ShadowLifting,
        Property::ScaleInvariance,
        Property::Idempotence,
        Property::Commutativity,
        Property::Associativity,
        Property::QuantifierCommutativity,
        Property::Soundness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Idempotence => "idempotence",
            Property::Commutativity => "commutativity",
            Property::Associativity => "associativity",
            Property::ScaleInvariance => "scale_invariance",
            Property::ShadowLifting => "shadow_lifting",
            Property::WeakSmoothness => "weak_smoothness",
            Property::QuantifierCommutativity => "quantifier_commutativity",
            Property::Soundness => "soundness",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("unknown property `{0}`")]
pub struct UnknownProperty(String);

impl FromStr for Property {
    type Err = UnknownProperty;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s.replace('-', "_"))
            .ok_or_else(|| UnknownProperty(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// The property holds only because its premise is never met.
    Vacuous,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Vacuous => "vacuous",
        })
    }
}

/// Outcome of checking one property of one logic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub logic: LogicKind,
    pub property: Property,
    pub verdict: Verdict,
    /// Numeric evidence only; not a decision procedure.
    pub advisory: bool,
    pub trials: usize,
    pub tolerance: f64,
    /// Size of the violation at the witness (zero when the property holds).
    pub magnitude: f64,
    pub witness: Option<Witness>,
    /// Supporting evidence in words.
    pub note: String,
}

impl PropertyVerdict {
    fn holds(logic: &Logic, property: Property, trials: usize, tolerance: f64) -> Self {
        PropertyVerdict {
            logic: logic.kind,
            property,
            verdict: Verdict::Holds,
            advisory: false,
            trials,
            tolerance,
            magnitude: 0.0,
            witness: None,
            note: String::new(),
        }
    }

    fn fails(logic: &Logic, property: Property, trials: usize, tolerance: f64, witness: Witness, magnitude: f64) -> Self {
        PropertyVerdict {
            verdict: Verdict::Fails,
            magnitude,
            witness: Some(witness),
            ..PropertyVerdict::holds(logic, property, trials, tolerance)
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Whether the verdict agrees with the expected entry; vacuous counts as "no".
    pub fn matches(&self, expected: bool) -> bool {
        (self.verdict == Verdict::Holds) == expected
    }

    /// One line of text report.
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "{:<12} {:<25} {:<8}",
            self.logic.name(),
            self.property.name(),
            self.verdict.to_string() + if self.advisory { "*" } else { "" }
        );
        if self.verdict == Verdict::Fails {
            line.push_str(&format!(" magnitude={}", ldl_core::fmt::g(self.magnitude, 6)));
        }
        if let Some(w) = &self.witness {
            line.push_str(&format!(" witness: {w}"));
        }
        if !self.note.is_empty() {
            line.push_str(&format!(" ({})", self.note));
        }
        line
    }
}

/// The property table as established for the six logics: whether each
/// logic has each property. Weak smoothness refers to the connectives; STL
/// soundness is vacuous and so listed as "no".
pub fn expected(kind: LogicKind, property: Property) -> bool {
    use LogicKind::*;
    use Property::*;
    match property {
        WeakSmoothness | ShadowLifting => matches!(kind, Dl2 | Product | Stl),
        ScaleInvariance => matches!(kind, Dl2 | Godel | Stl),
        Idempotence => matches!(kind, Godel | Stl),
        Commutativity => true,
        Associativity => kind != Stl,
        QuantifierCommutativity => kind == Godel,
        Soundness => matches!(kind, Dl2 | Godel | Product),
    }
}

/// Parameters shared by the checks.
#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { trials: 10_000, seed: 7 }
    }
}

/// Checks one property.
pub fn check(logic: &Logic, property: Property, cfg: &CheckConfig) -> PropertyVerdict {
    let seed = mix(cfg.seed, logic.kind, property);
    match property {
        Property::Idempotence
        | Property::Commutativity
        | Property::Associativity
        | Property::ScaleInvariance => algebraic::check_algebraic(logic, property, cfg.trials, seed),
        Property::ShadowLifting => shadow::check_shadow_lifting(logic, cfg.trials, seed),
        Property::WeakSmoothness => smoothness::check_weak_smoothness(logic, cfg.trials, seed),
        Property::QuantifierCommutativity => quantifiers::check_quantifier_commutativity(logic, cfg.trials, seed),
        Property::Soundness => soundness::check_soundness(logic, cfg.trials, seed),
    }
}

/// Checks every property of every given logic, in table order.
pub fn run_all(logics: &[Logic], cfg: &CheckConfig) -> Vec<PropertyVerdict> {
    logics
        .iter()
        .flat_map(|l| Property::ALL.into_iter().map(move |p| check(l, p, cfg)))
        .collect()
}

/// Renders verdicts as a logic-by-property table with a mark for every
/// entry that disagrees with [`expected`].
pub fn matrix_text(verdicts: &[PropertyVerdict]) -> String {
    let mut logics: Vec<LogicKind> = Vec::new();
    for v in verdicts {
        if !logics.contains(&v.logic) {
            logics.push(v.logic);
        }
    }
    let mut out = format!("{:<25}", "property");
    for l in &logics {
        out.push_str(&format!(" {:>12}", l.name()));
    }
    out.push('\n');
    for p in Property::ALL {
        out.push_str(&format!("{:<25}", p.name()));
        for l in &logics {
            let cell = match verdicts.iter().find(|v| v.logic == *l && v.property == p) {
                Some(v) => {
                    let mut s = match v.verdict {
                        Verdict::Holds => "yes".to_string(),
                        Verdict::Fails => "no".to_string(),
                        Verdict::Vacuous => "vacuous".to_string(),
                    };
                    if v.advisory {
                        s.push('*');
                    }
                    if !v.matches(expected(*l, p)) {
                        s.push('!');
                    }
                    s
                }
                None => "-".to_string(),
            };
            out.push_str(&format!(" {cell:>12}"));
        }
        out.push('\n');
    }
    out
}

fn mix(seed: u64, kind: LogicKind, property: Property) -> u64 {
    let k = LogicKind::ALL.iter().position(|x| *x == kind).unwrap_or(0) as u64;
    let p = property as u64;
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (k << 8) ^ (p << 16)
}

/// `|a - b|` relative to the larger magnitude, floored at 1.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Range from which truth values are sampled: the truth domain, with finite
/// surrogates for infinite ends.
pub fn sampling_domain(kind: LogicKind) -> (f64, f64) {
    match kind {
        LogicKind::Dl2 => (-1e6, 0.0),
        LogicKind::Stl => (-1e6, 1e6),
        _ => (0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert!("nonsense".parse::<Property>().is_err());
    }

    #[test]
    fn expected_table_rows() {
        let row = |p| LogicKind::ALL.map(|k| expected(k, p));
        assert_eq!(row(Property::Idempotence), [false, true, false, false, false, true]);
        assert_eq!(row(Property::Associativity), [true, true, true, true, true, false]);
        assert_eq!(row(Property::QuantifierCommutativity), [false, true, false, false, false, false]);
        assert_eq!(row(Property::Soundness), [true, true, false, false, true, false]);
    }

    #[test]
    fn relative_deviation_floors_at_one() {
        assert_eq!(relative_deviation(1e-12, 0.0), 1e-12);
        assert_eq!(relative_deviation(2e6, 1e6), 0.5);
        assert_eq!(relative_deviation(3.0, 3.0), 0.0);
    }
}
