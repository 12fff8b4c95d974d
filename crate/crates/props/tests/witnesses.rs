use ldl_core::logic::{Logic, LogicKind};
use ldl_props::{check, relative_deviation, run_all, sampling_domain, CheckConfig, Property, Verdict, Witness};
use proptest::prelude::*;

fn logics() -> Vec<Logic> {
    LogicKind::ALL.into_iter().map(Logic::new).collect()
}

#[test]
fn witnesses_survive_serialization_and_replay() {
    let cfg = CheckConfig { trials: 1000, seed: 11 };
    for v in run_all(&logics(), &cfg) {
        let Some(w) = &v.witness else {
            assert_ne!(v.verdict, Verdict::Fails, "{}", v.to_line());
            continue;
        };
        let json = serde_json::to_string(&v).unwrap();
        let back: ldl_props::PropertyVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        let again = back.witness.unwrap().replay(&Logic::new(v.logic));
        assert_eq!(again, w.replay(&Logic::new(v.logic)));
        if v.property != Property::ShadowLifting {
            assert!(again > v.tolerance, "{}", v.to_line());
        }
    }
}

#[test]
fn checks_are_deterministic() {
    let cfg = CheckConfig { trials: 500, seed: 3 };
    for l in logics() {
        for p in [Property::Associativity, Property::QuantifierCommutativity, Property::Soundness] {
            assert_eq!(check(&l, p, &cfg), check(&l, p, &cfg));
        }
    }
}

#[test]
fn unsound_witness_text_is_replayable() {
    let w = Witness::Unsound {
        formula: "(1.0 <= 2.0) => (1.0 == 0.5)".into(),
    };
    // Lukasiewicz: the antecedent is 1 - tanh 1 = 0.238 and the consequent
    // 1 - tanh 0.5 = 0.538, so min(1 - 0.238 + 0.538, 1) = 1
    assert_eq!(w.replay(&Logic::new(LogicKind::Lukasiewicz)), 1.0);
    assert_eq!(w.replay(&Logic::new(LogicKind::Godel)), 0.0);
}

proptest! {
    #[test]
    fn binary_conjunction_commutes(k in 0usize..6, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let l = Logic::new(LogicKind::ALL[k]);
        let (lo, hi) = sampling_domain(l.kind);
        let (a, b) = (lo + s * (hi - lo), lo + t * (hi - lo));
        prop_assert!(relative_deviation(l.and(&a, &b), l.and(&b, &a)) <= 1e-12);
    }

    #[test]
    fn relative_deviation_is_symmetric_and_nonnegative(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let d = relative_deviation(a, b);
        prop_assert_eq!(d, relative_deviation(b, a));
        prop_assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn godel_conjunction_is_the_minimum(v in proptest::collection::vec(0.0f64..=1.0, 1..6)) {
        let l = Logic::new(LogicKind::Godel);
        let m = v.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(l.and_n(&v), m);
    }
}
