//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use relindex_core::bschwinger::BSInstance;
use relindex_core::ensemble::{generate, ginibre, trial_rng};
use relindex_core::{AlgebraDescriptor, Ensemble, Operator};

pub const SEED: u64 = 7;

/// Block sizes the benchmarks sweep over.
pub const DIMS: [usize; 4] = [4, 8, 16, 32];

pub fn factor(n: usize) -> Arc<AlgebraDescriptor> {
    Arc::new(AlgebraDescriptor::factor(n).expect("positive dimension"))
}

pub fn operator(ensemble: Ensemble, n: usize) -> Operator {
    generate(ensemble, &factor(n), &mut trial_rng(SEED, n as u64))
}

pub fn bs_instance(n: usize) -> BSInstance {
    let alg = factor(n);
    let mut rng = trial_rng(SEED ^ 1, n as u64);
    let m = generate(Ensemble::Dissipative, &alg, &mut rng);
    let k = ginibre(&alg, &mut rng);
    let nn = generate(Ensemble::Dissipative, &alg, &mut rng);
    BSInstance::new(m, nn, k).expect("dissipative by construction")
}
