mod common;

use common::{c, descriptor, draw, rng};
use proptest::prelude::*;
use relindex_core::dets::{
    det_tau_dissipative, det_tau_unitary, dissipative_path, dlhs_det_path, fk_det, polar_identity_check,
    OperatorPath,
};
use relindex_core::quad::QuadPolicy;
use relindex_core::{Ensemble, Operator};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fk_det_is_multiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 8);
        let a = draw(Ensemble::PositiveDefinite, &alg, &mut r);
        let b = draw(Ensemble::Dissipative, &alg, &mut r);
        // A commuting partner: a polynomial in A.
        let a2 = &(&a * &a) + &a.shift(c(0.5, 0.0));
        let da = fk_det(&a).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        prop_assert!(rel(fk_det(&(&a * &a2)).unwrap(), da * fk_det(&a2).unwrap()) <= 1e-10);
        prop_assert!(rel(fk_det(&(&a * &b)).unwrap(), da * fk_det(&b).unwrap()) <= 1e-9);
    }

    #[test]
    fn fk_det_of_unitaries_is_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 8);
        let u = draw(Ensemble::UnitaryHaarLike, &alg, &mut r);
        prop_assert!((fk_det(&u).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((det_tau_unitary(&u).unwrap().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn polar_identity_holds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 8);
        let m = draw(Ensemble::Dissipative, &alg, &mut r);
        let report = polar_identity_check(&m).unwrap();
        prop_assert!(report.pass, "residual {}", report.residual);
    }

    #[test]
    fn path_determinant_matches_closed_form(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 6);
        let m = draw(Ensemble::Dissipative, &alg, &mut r).shift(c(0.0, 0.2));
        let path = dissipative_path(&m).unwrap().path;
        let d = dlhs_det_path(&path, &QuadPolicy::default()).unwrap();
        let closed = det_tau_dissipative(&m).unwrap();
        prop_assert!((d.value - closed).norm() <= 1e-7 * closed.norm().max(1.0));
        // Modulus of any path determinant is the Fuglede-Kadison determinant.
        prop_assert!((d.value.norm() - fk_det(&m).unwrap()).abs() <= 1e-7 * d.value.norm().max(1.0));
    }
}

#[test]
fn scalar_determinants() {
    let alg = std::sync::Arc::new(relindex_core::AlgebraDescriptor::from_pairs(&[(1, 0.25), (2, 0.375)]).unwrap());
    let x = Operator::scalar(&alg, c(2.0, 0.0));
    assert!((fk_det(&x).unwrap() - 2.0).abs() <= 1e-14);
    let lin = OperatorPath::linear(&Operator::identity(&alg), &x).unwrap();
    let d = dlhs_det_path(&lin, &QuadPolicy::default()).unwrap();
    assert!((d.value - c(2.0, 0.0)).norm() <= 1e-10);
    assert!(d.winding().abs() <= 1e-12);
}

#[test]
fn singular_operator_has_no_fk_det() {
    let alg = std::sync::Arc::new(relindex_core::AlgebraDescriptor::factor(2).unwrap());
    assert!(fk_det(&Operator::real_diagonal(&alg, &[0.0, 1.0]).unwrap()).is_err());
}
