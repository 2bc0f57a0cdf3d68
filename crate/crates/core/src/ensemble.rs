//! Seeded random operators and descriptors.
//!
//! Trial `i` of a run with seed `s` draws from a ChaCha8 stream keyed by
//! `splitmix64(s, i)`, so trials can be evaluated in any order or in
//! parallel with identical results.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Block, Operator};
use crate::dense::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// `(G + G*)/2` for a complex Ginibre `G`.
    HermitianGaussian,
    /// `A + iB` with `A` Hermitian Gaussian and `B = G*G` positive semidefinite.
    Dissipative,
    /// `G*G + δI`.
    PositiveDefinite,
    /// Haar-distributed unitary from a phase-corrected QR factorization.
    UnitaryHaarLike,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::HermitianGaussian => "hermitian-gaussian",
            Ensemble::Dissipative => "dissipative",
            Ensemble::PositiveDefinite => "positive-definite",
            Ensemble::UnitaryHaarLike => "unitary-haar-like",
        })
    }
}

impl FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "hermitian-gaussian" => Ok(Ensemble::HermitianGaussian),
            "dissipative" => Ok(Ensemble::Dissipative),
            "positive-definite" => Ok(Ensemble::PositiveDefinite),
            "unitary-haar-like" => Ok(Ensemble::UnitaryHaarLike),
            other => Err(Error::Domain(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Spectral floor added in the positive definite ensemble.
pub const POSITIVE_FLOOR: f64 = 0.1;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial)
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, trial))
}

fn normal_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre_block<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let scale = 1.0 / (n as f64).sqrt();
    Matrix::from_fn(n, n, |_, _| normal_c(rng) * scale)
}

/// Complex Ginibre operator with entries of variance `1/n` per block.
pub fn ginibre<R: Rng + ?Sized>(alg: &Arc<AlgebraDescriptor>, rng: &mut R) -> Operator {
    let blocks = alg.blocks().iter().map(|b| ginibre_block(b.dim, rng)).collect();
    Operator::new(alg.clone(), blocks).expect("finite Gaussian entries")
}

pub fn hermitian_gaussian<R: Rng + ?Sized>(alg: &Arc<AlgebraDescriptor>, rng: &mut R) -> Operator {
    let g = ginibre(alg, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// `G*G`, positive semidefinite by construction.
pub fn gram<R: Rng + ?Sized>(alg: &Arc<AlgebraDescriptor>, rng: &mut R) -> Operator {
    let g = ginibre(alg, rng);
    (&g.adjoint() * &g).re_part()
}

pub fn generate<R: Rng + ?Sized>(ensemble: Ensemble, alg: &Arc<AlgebraDescriptor>, rng: &mut R) -> Operator {
    match ensemble {
        Ensemble::HermitianGaussian => hermitian_gaussian(alg, rng),
        Ensemble::Dissipative => {
            let a = hermitian_gaussian(alg, rng);
            let b = gram(alg, rng);
            &a + &b.scale(Complex64::new(0.0, 1.0))
        }
        Ensemble::PositiveDefinite => gram(alg, rng).shift(Complex64::new(POSITIVE_FLOOR, 0.0)),
        Ensemble::UnitaryHaarLike => {
            let g = ginibre(alg, rng);
            g.map_blocks(|m| {
                let qr = m.clone().qr();
                let (mut q, r) = (qr.q(), qr.r());
                for j in 0..q.ncols() {
                    let d = r[(j, j)];
                    let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
                    for i in 0..q.nrows() {
                        q[(i, j)] *= phase;
                    }
                }
                q
            })
        }
    }
}

/// Which descriptor shapes a sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescriptorFamily {
    SingleFactor,
    TwoBlock,
    /// Alternates between the two by coin flip.
    Mixed,
}

/// A random descriptor with block dimensions in `min_dim..=max_dim`.
///
/// Two-block descriptors give the first block a random share of the trace
/// in `[0.1, 0.9]`, so weights are generally irrational.
pub fn random_descriptor<R: Rng + ?Sized>(
    family: DescriptorFamily,
    min_dim: usize,
    max_dim: usize,
    rng: &mut R,
) -> Result<Arc<AlgebraDescriptor>> {
    if min_dim == 0 || min_dim > max_dim {
        return Err(Error::Domain(format!("invalid dimension range {min_dim}..={max_dim}")));
    }
    let two = match family {
        DescriptorFamily::SingleFactor => false,
        DescriptorFamily::TwoBlock => true,
        DescriptorFamily::Mixed => rng.random_bool(0.5),
    };
    let d1 = rng.random_range(min_dim..=max_dim);
    let desc = if two {
        let d2 = rng.random_range(min_dim..=max_dim);
        let share: f64 = rng.random_range(0.1..0.9);
        AlgebraDescriptor::new(vec![
            Block {
                dim: d1,
                weight: share / d1 as f64,
            },
            Block {
                dim: d2,
                weight: (1.0 - share) / d2 as f64,
            },
        ])?
    } else {
        AlgebraDescriptor::factor(d1)?
    };
    Ok(Arc::new(desc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::dissipativity_defect;

    #[test]
    fn deterministic_per_trial() {
        let alg = Arc::new(AlgebraDescriptor::from_pairs(&[(3, 0.2), (2, 0.2)]).unwrap());
        for e in [
            Ensemble::HermitianGaussian,
            Ensemble::Dissipative,
            Ensemble::PositiveDefinite,
            Ensemble::UnitaryHaarLike,
        ] {
            let a = generate(e, &alg, &mut trial_rng(42, 7));
            let b = generate(e, &alg, &mut trial_rng(42, 7));
            assert_eq!(a, b);
            let c = generate(e, &alg, &mut trial_rng(42, 8));
            assert_ne!(a, c);
        }
    }

    #[test]
    fn ensemble_properties() {
        let alg = Arc::new(AlgebraDescriptor::factor(6).unwrap());
        let mut rng = trial_rng(1, 0);
        let h = generate(Ensemble::HermitianGaussian, &alg, &mut rng);
        assert!(h.is_self_adjoint());
        let d = generate(Ensemble::Dissipative, &alg, &mut rng);
        assert!(dissipativity_defect(&d) < 1e-14);
        let p = generate(Ensemble::PositiveDefinite, &alg, &mut rng);
        assert!(p.hermitian_eigen().unwrap().min_eigenvalue() > 0.0);
        let u = generate(Ensemble::UnitaryHaarLike, &alg, &mut rng);
        assert!(u.unitarity_residual() < 1e-13);
    }

    #[test]
    fn descriptors() {
        let mut rng = trial_rng(3, 0);
        for _ in 0..50 {
            let d = random_descriptor(DescriptorFamily::Mixed, 2, 16, &mut rng).unwrap();
            assert!(d.blocks().len() <= 2);
            assert!(d.dims().iter().all(|&n| (2..=16).contains(&n)));
        }
        assert!(random_descriptor(DescriptorFamily::TwoBlock, 3, 2, &mut rng).is_err());
    }

    #[test]
    fn ensemble_names_round_trip() {
        for e in [Ensemble::HermitianGaussian, Ensemble::UnitaryHaarLike] {
            assert_eq!(e.to_string().parse::<Ensemble>().unwrap(), e);
        }
        assert!("gaussian".parse::<Ensemble>().is_err());
    }
}
