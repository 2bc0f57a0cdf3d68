mod common;

use common::{descriptor, draw, rng};
use proptest::prelude::*;
use relindex_core::bschwinger::{verify_bs, BSInstance};
use relindex_core::ensemble::{generate, ginibre, trial_rng};
use relindex_core::{matrix_io, Ensemble, VerificationReport};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matrix_files_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 6);
        let x = ginibre(&alg, &mut r);
        prop_assert_eq!(matrix_io::parse(&matrix_io::format(&x)).unwrap(), x);
    }

    #[test]
    fn reports_round_trip_through_json(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 6);
        let inst = BSInstance::new(
            draw(Ensemble::Dissipative, &alg, &mut r),
            draw(Ensemble::Dissipative, &alg, &mut r),
            ginibre(&alg, &mut r),
        )
        .unwrap();
        let report = verify_bs(&inst).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }

    #[test]
    fn ensembles_are_deterministic(seed in any::<u64>(), trial in 0u64..1000) {
        let alg = descriptor(&mut rng(seed), 6);
        for e in [Ensemble::HermitianGaussian, Ensemble::Dissipative, Ensemble::PositiveDefinite, Ensemble::UnitaryHaarLike] {
            let a = generate(e, &alg, &mut trial_rng(seed, trial));
            let b = generate(e, &alg, &mut trial_rng(seed, trial));
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn report_json_has_the_expected_keys() {
    let mut r = rng(5);
    let alg = descriptor(&mut r, 4);
    let inst = BSInstance::new(
        draw(Ensemble::Dissipative, &alg, &mut r),
        draw(Ensemble::Dissipative, &alg, &mut r),
        ginibre(&alg, &mut r),
    )
    .unwrap();
    let v = serde_json::to_value(verify_bs(&inst).unwrap().without_timing()).unwrap();
    for key in ["identity", "anchor", "inputs", "lhs", "rhs", "residual", "tolerance", "pass", "warnings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v.get("elapsed_ms").is_none());
}
