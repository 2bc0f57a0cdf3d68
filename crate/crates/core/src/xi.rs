//! The Ξ-operator of a dissipative operator, the relative ξ-index, and the
//! self-adjoint specializations built on them.
//!
//! Three routes compute `Ξ(M)`:
//!
//! * `InvertibleLog`: `(1/π) Im log M` on the imaginary-cut branch;
//! * `SelfAdjointSpectral`: `E_M(ℝ₋) + ½ E_M({0})`;
//! * `EpsLimit`: the `ε ↓ 0` limit of `Ξ(M + iε)`.
//!
//! Trace-level quantities (`τ[Ξ(M)]`, ξ-indices) are evaluated from the
//! spectrum, since `τ[f(M)] = Σ_i w_i Σ_λ f(λ)` for any holomorphic `f`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{dissipativity_defect, HermitianEigen, Operator, DISSIPATIVE_TOL};
use crate::eps::EpsSchedule;
use crate::error::{Error, Result};
use crate::oplog::{log_op, BranchConvention};

/// Eigenvalues with `|λ| ≤ KERNEL_REL_TOL · ‖H‖` count as kernel.
pub const KERNEL_REL_TOL: f64 = 1e-8;
/// Eigenvalues within this factor of the kernel threshold trigger a warning.
const NEAR_KERNEL_FACTOR: f64 = 100.0;
/// Slack on `0 ⪯ Ξ ⪯ I`.
pub const CONTRACTION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XiStrategy {
    InvertibleLog,
    SelfAdjointSpectral,
    EpsLimit,
}

/// Strategy selection and the schedule used by the ε-limit route.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct XiOptions {
    /// `None` selects spectral > log > ε-limit by applicability.
    pub strategy: Option<XiStrategy>,
    pub schedule: EpsSchedule,
}

impl XiOptions {
    pub fn fixed(strategy: XiStrategy) -> Self {
        Self {
            strategy: Some(strategy),
            ..Self::default()
        }
    }
}

/// `τ[Ξ(M)]` with diagnostics.
#[derive(Debug, Clone)]
pub struct XiTrace {
    pub value: f64,
    pub strategy: XiStrategy,
    pub warnings: Vec<String>,
}

fn check_dissipative(m: &Operator) -> Result<()> {
    let defect = dissipativity_defect(m);
    if defect > DISSIPATIVE_TOL * m.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "operator is not dissipative (λ_min(Im M) = {:e})",
            -defect
        )));
    }
    Ok(())
}

pub fn select_strategy(m: &Operator) -> XiStrategy {
    if m.is_self_adjoint() {
        XiStrategy::SelfAdjointSpectral
    } else if m.is_invertible() {
        XiStrategy::InvertibleLog
    } else {
        XiStrategy::EpsLimit
    }
}

fn resolve(m: &Operator, opts: &XiOptions) -> Result<XiStrategy> {
    check_dissipative(m)?;
    let strategy = opts.strategy.unwrap_or_else(|| select_strategy(m));
    match strategy {
        XiStrategy::SelfAdjointSpectral if !m.is_self_adjoint() => Err(Error::Domain(
            "spectral strategy needs a self-adjoint operator".into(),
        )),
        XiStrategy::InvertibleLog if !m.is_invertible() => Err(Error::Domain(
            "logarithmic strategy needs an invertible operator".into(),
        )),
        s => Ok(s),
    }
}

fn kernel_threshold(eig: &HermitianEigen) -> f64 {
    KERNEL_REL_TOL * eig.max_abs_eigenvalue()
}

fn near_kernel_warnings(eig: &HermitianEigen, threshold: f64) -> Vec<String> {
    eig.values
        .iter()
        .flatten()
        .filter(|&&l| l.abs() > threshold && l.abs() <= NEAR_KERNEL_FACTOR * threshold)
        .map(|l| format!("eigenvalue {l:e} is close to the kernel threshold {threshold:e}"))
        .collect()
}

/// Spectral `Ξ` weights: 1 on `(-∞, -t)`, ½ on `[-t, t]`, 0 above.
fn spectral_xi_weight(l: f64, threshold: f64) -> f64 {
    if l.abs() <= threshold {
        0.5
    } else if l < 0.0 {
        1.0
    } else {
        0.0
    }
}

fn eigen_arg_sum(eigs: &[Vec<Complex64>], weights: &[f64], shift: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (vals, &w) in eigs.iter().zip(weights) {
        let mut s = 0.0;
        for &l in vals {
            s += BranchConvention::ImCut.arg(l + Complex64::new(0.0, shift))?;
        }
        acc += w * s;
    }
    Ok(acc / PI)
}

/// `τ[Ξ(M)]` for dissipative `M`.
pub fn tau_xi(m: &Operator, opts: &XiOptions) -> Result<XiTrace> {
    let strategy = resolve(m, opts)?;
    let weights: Vec<f64> = m.algebra().blocks().iter().map(|b| b.weight).collect();
    match strategy {
        XiStrategy::SelfAdjointSpectral => {
            let eig = m.hermitian_eigen()?;
            let t = kernel_threshold(&eig);
            let value = eig
                .values
                .iter()
                .zip(&weights)
                .map(|(v, w)| w * v.iter().map(|&l| spectral_xi_weight(l, t)).sum::<f64>())
                .sum();
            Ok(XiTrace {
                value,
                strategy,
                warnings: near_kernel_warnings(&eig, t),
            })
        }
        XiStrategy::InvertibleLog => Ok(XiTrace {
            value: eigen_arg_sum(&m.eigenvalues()?, &weights, 0.0)?,
            strategy,
            warnings: Vec::new(),
        }),
        XiStrategy::EpsLimit => {
            let eigs = m.eigenvalues()?;
            let limit = opts
                .schedule
                .limit("τ[Ξ(M + iε)]", |e| eigen_arg_sum(&eigs, &weights, e))?;
            Ok(XiTrace {
                value: limit.value,
                strategy,
                warnings: Vec::new(),
            })
        }
    }
}

/// The Ξ-operator, a self-adjoint contraction `0 ⪯ Ξ(M) ⪯ I`.
pub fn xi_operator(m: &Operator, opts: &XiOptions) -> Result<Operator> {
    let strategy = resolve(m, opts)?;
    match strategy {
        XiStrategy::SelfAdjointSpectral => {
            let eig = m.hermitian_eigen()?;
            let t = kernel_threshold(&eig);
            Ok(eig.apply(|l| Complex64::new(spectral_xi_weight(l, t), 0.0)))
        }
        XiStrategy::InvertibleLog => Ok(log_xi(m)?),
        XiStrategy::EpsLimit => {
            let limit = opts.schedule.limit("Ξ(M + iε)", |e| {
                log_xi(&m.shift(Complex64::new(0.0, e)))
            })?;
            Ok(limit.value.re_part())
        }
    }
}

fn log_xi(m: &Operator) -> Result<Operator> {
    Ok(log_op(m, BranchConvention::ImCut)?
        .im_part()
        .scale_real(1.0 / PI))
}

/// `ξ(M, N) = τ[Ξ(N)] - τ[Ξ(M)]`.
pub fn xi_index(m: &Operator, n: &Operator, opts: &XiOptions) -> Result<f64> {
    m.check_same_algebra(n)?;
    Ok(tau_xi(n, opts)?.value - tau_xi(m, opts)?.value)
}

/// `index_τ(P, Q) = τ(P - Q)` for orthogonal projections.
pub fn tau_fredholm_index(p: &Operator, q: &Operator) -> Result<f64> {
    p.check_same_algebra(q)?;
    for (name, x) in [("P", p), ("Q", q)] {
        let r = x.projection_residual();
        if r > 1e-9 {
            return Err(Error::Domain(format!(
                "{name} is not an orthogonal projection (residual {r:e})"
            )));
        }
    }
    Ok((p - q).tau().re)
}

/// `E_H(ℝ₋)` and `E_H({0})` with the kernel tolerance applied.
pub fn negative_and_kernel_projections(h: &Operator) -> Result<(Operator, Operator)> {
    let eig = h.hermitian_eigen()?;
    let t = kernel_threshold(&eig);
    Ok((
        eig.projection(|l| l < -t),
        eig.projection(|l| l.abs() <= t),
    ))
}

/// Split of `ξ(H, H0)` into its negative-spectrum and kernel contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAdjointSplit {
    /// `index_τ(E_{H0}(ℝ₋), E_H(ℝ₋))`.
    pub continuous: f64,
    /// `½ index_τ(E_{H0}({0}), E_H({0}))`.
    pub kernel: f64,
    pub total: f64,
}

pub fn xi_selfadjoint_split(h: &Operator, h0: &Operator) -> Result<SelfAdjointSplit> {
    h.check_same_algebra(h0)?;
    let (neg_h, ker_h) = negative_and_kernel_projections(h)?;
    let (neg_h0, ker_h0) = negative_and_kernel_projections(h0)?;
    let continuous = tau_fredholm_index(&neg_h0, &neg_h)?;
    let kernel = 0.5 * tau_fredholm_index(&ker_h0, &ker_h)?;
    Ok(SelfAdjointSplit {
        continuous,
        kernel,
        total: continuous + kernel,
    })
}

/// `τ[Ξ(H)]` for self-adjoint invertible `H`: the weighted dimension of the
/// negative spectral subspace.
pub fn morse_index(h: &Operator) -> Result<f64> {
    if !h.is_invertible() {
        return Err(Error::Domain("Morse index needs an invertible operator".into()));
    }
    Ok(tau_xi(h, &XiOptions::fixed(XiStrategy::SelfAdjointSpectral))?.value)
}

/// `λ ↦ ξ(H - λ, H0 - λ)` on a grid.
pub fn ssf_curve(h: &Operator, h0: &Operator, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    h.check_same_algebra(h0)?;
    let opts = XiOptions::fixed(XiStrategy::SelfAdjointSpectral);
    grid.iter()
        .map(|&l| {
            let shift = Complex64::new(-l, 0.0);
            Ok((l, xi_index(&h.shift(shift), &h0.shift(shift), &opts)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraDescriptor;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> Arc<AlgebraDescriptor> {
        Arc::new(AlgebraDescriptor::factor(1).unwrap())
    }

    fn auto() -> XiOptions {
        XiOptions::default()
    }

    #[test]
    fn xi_operator_examples() {
        let a2 = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let x = xi_operator(&Operator::scalar(&a2, c(0.0, 1.0)), &auto()).unwrap();
        assert!(x.distance(&Operator::scalar(&a2, c(0.5, 0.0))) < 1e-15);

        let a3 = Arc::new(AlgebraDescriptor::factor(3).unwrap());
        let x = xi_operator(&Operator::scalar(&a3, c(-1.0, 0.0)), &auto()).unwrap();
        assert!(x.distance(&Operator::identity(&a3)) < 1e-15);

        let x = xi_operator(&Operator::zeros(&one()), &auto()).unwrap();
        assert!((x.blocks()[0][(0, 0)].re - 0.5).abs() < 1e-15);

        let x = xi_operator(&Operator::scalar(&one(), c(1.0, 1.0)), &auto()).unwrap();
        assert!((x.blocks()[0][(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_dissipative() {
        let m = Operator::scalar(&one(), c(1.0, -1.0));
        assert!(matches!(xi_operator(&m, &auto()), Err(Error::Domain(_))));
        assert!(matches!(tau_xi(&m, &auto()), Err(Error::Domain(_))));
    }

    #[test]
    fn strategy_preconditions() {
        let m = Operator::scalar(&one(), c(1.0, 1.0));
        let r = xi_operator(&m, &XiOptions::fixed(XiStrategy::SelfAdjointSpectral));
        assert!(matches!(r, Err(Error::Domain(_))));
        let z = Operator::zeros(&one());
        let r = xi_operator(&z, &XiOptions::fixed(XiStrategy::InvertibleLog));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn eps_limit_of_zero_is_half() {
        let z = Operator::zeros(&one());
        let opts = XiOptions::fixed(XiStrategy::EpsLimit);
        assert!((tau_xi(&z, &opts).unwrap().value - 0.5).abs() < 1e-12);
        let x = xi_operator(&z, &opts).unwrap();
        assert!((x.blocks()[0][(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn xi_index_examples() {
        let a = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let id = Operator::identity(&a);
        assert!((xi_index(&id, &-&id, &auto()).unwrap() - 1.0).abs() < 1e-15);

        let i = Operator::scalar(&one(), c(0.0, 1.0));
        let im1 = Operator::scalar(&one(), c(-1.0, 1.0));
        assert!((xi_index(&i, &im1, &auto()).unwrap() - 0.25).abs() < 1e-15);

        let two = Arc::new(AlgebraDescriptor::from_pairs(&[(1, 0.3), (1, 0.7)]).unwrap());
        let d = Operator::real_diagonal(&two, &[-1.0, 1.0]).unwrap();
        assert!((xi_index(&Operator::identity(&two), &d, &auto()).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn fredholm_index_examples() {
        let a = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let id = Operator::identity(&a);
        assert_eq!(tau_fredholm_index(&id, &id).unwrap(), 0.0);
        assert!((tau_fredholm_index(&id, &Operator::zeros(&a)).unwrap() - 1.0).abs() < 1e-15);
        let two = Arc::new(AlgebraDescriptor::from_pairs(&[(1, 0.3), (1, 0.7)]).unwrap());
        let p = Operator::real_diagonal(&two, &[1.0, 0.0]).unwrap();
        let z = Operator::zeros(&two);
        assert!((tau_fredholm_index(&p, &z).unwrap() - 0.3).abs() < 1e-15);
        let not_p = Operator::real_diagonal(&two, &[2.0, 0.0]).unwrap();
        assert!(matches!(tau_fredholm_index(&not_p, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn split_examples() {
        let h = Operator::scalar(&one(), c(3.0, 0.0));
        let s = xi_selfadjoint_split(&h, &h).unwrap();
        assert_eq!((s.continuous, s.kernel, s.total), (0.0, 0.0, 0.0));

        // ξ(0, 1) = τΞ(1) - τΞ(0) = -1/2, all from the kernel term.
        let s = xi_selfadjoint_split(&Operator::zeros(&one()), &Operator::identity(&one())).unwrap();
        assert_eq!(s.continuous, 0.0);
        assert!((s.kernel + 0.5).abs() < 1e-15);
        assert!((s.total + 0.5).abs() < 1e-15);
        let direct = xi_index(&Operator::zeros(&one()), &Operator::identity(&one()), &auto()).unwrap();
        assert!((direct - s.total).abs() < 1e-15);

        let m = Operator::scalar(&one(), c(0.0, 1.0));
        assert!(xi_selfadjoint_split(&m, &m).is_err());
    }

    #[test]
    fn morse_examples() {
        let a = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        assert!((morse_index(&Operator::scalar(&a, c(-1.0, 0.0))).unwrap() - 1.0).abs() < 1e-15);
        let d = Operator::real_diagonal(&a, &[-1.0, 1.0]).unwrap();
        assert!((morse_index(&d).unwrap() - 0.5).abs() < 1e-15);
        let s = Operator::real_diagonal(&a, &[0.0, 1.0]).unwrap();
        assert!(matches!(morse_index(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn ssf_examples() {
        let h = Operator::scalar(&one(), c(2.0, 0.0));
        let h0 = Operator::identity(&one());
        let curve = ssf_curve(&h, &h0, &[1.5]).unwrap();
        assert_eq!(curve, vec![(1.5, 1.0)]);
        let flat = ssf_curve(&h, &h, &[-1.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(flat.iter().all(|&(_, v)| v == 0.0));
    }
}
