#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use relindex_core::ensemble::{generate, random_descriptor, trial_rng, DescriptorFamily};
use relindex_core::{AlgebraDescriptor, Ensemble, Operator};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, 0)
}

pub fn descriptor(rng: &mut ChaCha8Rng, max_dim: usize) -> Arc<AlgebraDescriptor> {
    random_descriptor(DescriptorFamily::Mixed, 1, max_dim, rng).unwrap()
}

pub fn draw(e: Ensemble, alg: &Arc<AlgebraDescriptor>, rng: &mut ChaCha8Rng) -> Operator {
    generate(e, alg, rng)
}

/// Eigenvalues of the self-adjoint part, all blocks together.
pub fn spectrum(x: &Operator) -> Vec<f64> {
    x.re_part().hermitian_eigen().unwrap().values.into_iter().flatten().collect()
}
