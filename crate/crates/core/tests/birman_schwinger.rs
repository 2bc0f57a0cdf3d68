mod common;

use common::{c, descriptor, draw, rng};
use proptest::prelude::*;
use relindex_core::bschwinger::{
    block_corollary, bs_limit, factor_perturbation, resolvent_identity_residual, sa_specialization,
    schur_block_residual, verify_bs, BSInstance, LimitMode,
};
use relindex_core::ensemble::ginibre;
use relindex_core::report::Quantity;
use relindex_core::{EpsSchedule, Ensemble, Operator};

fn instance(seed: u64, max_dim: usize) -> BSInstance {
    let mut r = rng(seed);
    let alg = descriptor(&mut r, max_dim);
    let m = draw(Ensemble::Dissipative, &alg, &mut r);
    let n = draw(Ensemble::Dissipative, &alg, &mut r);
    let k = ginibre(&alg, &mut r);
    BSInstance::new(m, n, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identity_holds_on_random_instances(seed in any::<u64>()) {
        let inst = instance(seed, 10);
        let r = verify_bs(&inst).unwrap();
        prop_assert!(r.pass, "residual {}", r.residual);
        // The swapped instance exchanges the two sides.
        let s = verify_bs(&inst.swapped()).unwrap();
        prop_assert!((r.lhs.unwrap().as_complex() - s.rhs.unwrap().as_complex()).norm() <= 1e-12);
    }

    #[test]
    fn schur_blocks_invert_the_complements(seed in any::<u64>(), x in -2.0f64..2.0, y in 0.1f64..2.0) {
        let inst = instance(seed, 8);
        prop_assert!(schur_block_residual(&inst, c(x, y)).unwrap() <= 1e-10);
        prop_assert!(resolvent_identity_residual(&inst, c(x, y)).unwrap() <= 1e-10);
    }

    #[test]
    fn block_corollary_is_swap_symmetric(seed in any::<u64>()) {
        let inst = instance(seed, 6);
        let a = block_corollary(&inst).unwrap();
        let b = block_corollary(&inst.swapped()).unwrap();
        prop_assert!(a.pass && b.pass);
        let two_tau2 = |r: &relindex_core::VerificationReport| match r.quantities.get("two_tau2_xi") {
            Some(Quantity::Real(x)) => *x,
            other => panic!("missing quantity: {other:?}"),
        };
        prop_assert!((two_tau2(&a) - two_tau2(&b)).abs() <= 1e-9);
    }

    #[test]
    fn factorization_reconstructs_the_perturbation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = descriptor(&mut r, 8);
        let v = draw(Ensemble::HermitianGaussian, &alg, &mut r);
        let (k, n) = factor_perturbation(&v).unwrap();
        let rebuilt = -&(&(&k.adjoint() * &n.inv().unwrap()) * &k);
        prop_assert!(rebuilt.distance(&v) <= 1e-12 * v.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn regularized_modes_agree_with_the_plain_identity(seed in any::<u64>()) {
        let inst = instance(seed, 5);
        let plain = verify_bs(&inst).unwrap();
        let sched = EpsSchedule::default();
        for mode in [LimitMode::NInvertible, LimitMode::BothRegularized] {
            let r = bs_limit(&inst, &sched, mode).unwrap();
            prop_assert!(r.pass, "{mode:?}: residual {}", r.residual);
            let lhs = r.lhs.unwrap().as_complex();
            prop_assert!((lhs - plain.lhs.unwrap().as_complex()).norm() <= 1e-6);
        }
    }
}

#[test]
fn self_adjoint_specialization_counts_negative_eigenvalues() {
    let alg = std::sync::Arc::new(relindex_core::AlgebraDescriptor::factor(3).unwrap());
    let h0 = Operator::real_diagonal(&alg, &[1.0, 2.0, 3.0]).unwrap();
    let k = Operator::real_diagonal(&alg, &[2.0, 0.5, 1.9]).unwrap();
    let r = sa_specialization(&h0, &k, &Operator::identity(&alg)).unwrap();
    assert!(r.pass);
    assert_eq!(r.details.len(), 2);
}

#[test]
fn scalar_instance() {
    let alg = std::sync::Arc::new(relindex_core::AlgebraDescriptor::factor(1).unwrap());
    let s = |z| Operator::scalar(&alg, z);
    let inst = BSInstance::new(s(c(1.0, 0.0)), s(c(1.0, 0.0)), s(c(2.0, 0.0))).unwrap();
    let r = verify_bs(&inst).unwrap();
    // ξ(1, -3) = ξ(1, -3) = 1 on both sides.
    assert!(r.pass);
    assert!((r.lhs.unwrap().as_complex() - c(1.0, 0.0)).norm() <= 1e-12);
}
