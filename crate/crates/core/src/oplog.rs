//! Operator logarithms on the two branches in use, the resolvent-integral
//! route for the dissipative branch, the Neumann-type series near `I`, and
//! the argument of a unitary.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{is_dissipative, Operator, INVERTIBILITY_GATE};
use crate::dense::{self, ComplexSchur, Matrix};
use crate::error::{Error, Result};
use crate::quad::{self, QuadPolicy};

/// Relative distance to the branch cut below which `log_op` refuses to pick a side.
pub const CUT_PROXIMITY: f64 = 1e-12;
/// Eigenvector condition number above which `log_op` switches to the integral route.
pub const EIGENVECTOR_CONDITION_GATE: f64 = 1e6;
/// Series terms below this norm end `log_series`.
pub const SERIES_TERM_TOL: f64 = 1e-14;
/// Accepted `‖S*S - I‖` for unitaries.
pub const UNITARY_TOL: f64 = 1e-9;

const SERIES_MAX_TERMS: usize = 500_000;

/// Where the logarithm's cut sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchConvention {
    /// Cut along the negative imaginary semi-axis, `arg ∈ (-π/2, 3π/2)`.
    ImCut,
    /// Cut along the negative real semi-axis, `arg ∈ (-π, π]`; points on the
    /// cut get argument `π`.
    ReCut,
}

impl BranchConvention {
    pub fn arg(self, z: Complex64) -> Result<f64> {
        let r = z.norm();
        if r == 0.0 {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        match self {
            BranchConvention::ImCut => {
                if z.im <= 0.0 && z.re.abs() <= CUT_PROXIMITY * r {
                    return Err(Error::Branch { eigenvalue: z });
                }
                let theta = z.im.atan2(z.re);
                Ok(if theta <= -FRAC_PI_2 { theta + 2.0 * PI } else { theta })
            }
            BranchConvention::ReCut => {
                if z.re < 0.0 && z.im.abs() <= CUT_PROXIMITY * r {
                    Ok(PI)
                } else {
                    Ok(z.im.atan2(z.re))
                }
            }
        }
    }

    pub fn log(self, z: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(z.norm().ln(), self.arg(z)?))
    }
}

/// `log M` by functional calculus on the chosen branch.
///
/// Hermitian and normal blocks are diagonalized by a unitary; other blocks
/// go through a Schur-based eigenbasis, falling back to the resolvent
/// integral when that basis is ill-conditioned.
pub fn log_op(m: &Operator, branch: BranchConvention) -> Result<Operator> {
    let condition = m.condition_number();
    if !(condition <= INVERTIBILITY_GATE) {
        return Err(Error::Domain(format!(
            "logarithm of a singular operator (condition estimate {condition:e})"
        )));
    }
    m.try_map_blocks(|b| log_block(b, branch))
}

fn log_block(m: &Matrix, branch: BranchConvention) -> Result<Matrix> {
    let n = m.nrows();
    if let Some((a, b)) = dense::split_imag_shift(m) {
        let (values, vectors) = dense::hermitian_eigen(&a);
        let logs = values
            .iter()
            .map(|&x| branch.log(Complex64::new(x, b)))
            .collect::<Result<Vec<_>>>()?;
        let mut scaled = vectors.clone();
        for (c, l) in logs.iter().enumerate() {
            for r in 0..n {
                scaled[(r, c)] *= l;
            }
        }
        return Ok(scaled * vectors.adjoint());
    }

    let schur = ComplexSchur::new(m)?;
    let logs = schur
        .eigenvalues()
        .into_iter()
        .map(|z| branch.log(z))
        .collect::<Result<Vec<_>>>()?;
    let v = schur.eigenvectors();
    let vinv = if schur.is_normal() {
        Some(v.adjoint())
    } else if dense::condition_number(&v) < EIGENVECTOR_CONDITION_GATE {
        dense::inverse(&v)
    } else {
        None
    };
    match vinv {
        Some(vinv) => {
            let mut scaled = v;
            for (c, l) in logs.iter().enumerate() {
                for r in 0..n {
                    scaled[(r, c)] *= l;
                }
            }
            Ok(scaled * vinv)
        }
        None => match branch {
            BranchConvention::ImCut => log_integral_block(m, &QuadPolicy::default()),
            BranchConvention::ReCut => {
                // log on the real cut is the imaginary-cut log of iM, rotated back.
                let rotated = m * Complex64::new(0.0, 1.0);
                let mut out = log_integral_block(&rotated, &QuadPolicy::default())?;
                for i in 0..n {
                    out[(i, i)] -= Complex64::new(0.0, FRAC_PI_2);
                }
                Ok(out)
            }
        },
    }
}

/// Integrand of the resolvent representation after `λ = tan θ`:
/// `(M cos θ + i sin θ)^{-1} (I - M) e^{-iθ}`, smooth on `[0, π/2]`.
fn resolvent_integrand(m: &Matrix, one_minus_m: &Matrix, theta: f64) -> Result<Matrix> {
    let (s, c) = theta.sin_cos();
    let mut shifted = m * Complex64::new(c, 0.0);
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += Complex64::new(0.0, s);
    }
    let inv = dense::inverse(&shifted).ok_or_else(|| {
        Error::Domain(format!("resolvent is singular at θ = {theta} (spectrum meets the cut)"))
    })?;
    Ok(inv * one_minus_m * Complex64::new(c, -s))
}

fn log_integral_block(m: &Matrix, policy: &QuadPolicy) -> Result<Matrix> {
    let n = m.nrows();
    let one_minus_m = dense::identity(n) - m;
    let scale = m.norm().max(1.0);
    let policy = QuadPolicy {
        abs_tol: policy.abs_tol * scale,
        ..*policy
    };
    let q = quad::integrate(
        |theta| resolvent_integrand(m, &one_minus_m, theta),
        0.0,
        FRAC_PI_2,
        &policy,
    )?;
    Ok(q.value * Complex64::new(0.0, -1.0))
}

/// `log M = -i ∫_0^∞ ((M + iλ)^{-1} - (1 + iλ)^{-1}) dλ`, evaluated by
/// adaptive quadrature. `policy.abs_tol` is relative to `max(‖M‖, 1)`.
pub fn log_integral(m: &Operator, policy: &QuadPolicy) -> Result<Operator> {
    if !is_dissipative(m) {
        return Err(Error::Domain("resolvent integral needs a dissipative operator".into()));
    }
    if !m.is_invertible() {
        return Err(Error::Domain("resolvent integral needs an invertible operator".into()));
    }
    m.try_map_blocks(|b| log_integral_block(b, policy))
}

/// `log M = -Σ_{k≥1} (I - M)^k / k` for `‖M - I‖ < 1`.
pub fn log_series(m: &Operator) -> Result<Operator> {
    let id = Operator::identity(m.algebra());
    let x = &id - m;
    let radius = x.norm();
    if !(radius < 1.0) {
        return Err(Error::Domain(format!(
            "series logarithm needs ‖M - I‖ < 1, got {radius}"
        )));
    }
    m.try_map_blocks(|b| {
        let n = b.nrows();
        let x = dense::identity(n) - b;
        let mut power = x.clone();
        let mut sum = Matrix::zeros(n, n);
        for k in 1..=SERIES_MAX_TERMS {
            let term = &power * Complex64::new(1.0 / k as f64, 0.0);
            sum -= &term;
            if term.norm() < SERIES_TERM_TOL {
                return Ok(sum);
            }
            power = &power * &x;
        }
        Err(Error::Numeric("series logarithm did not converge".into()))
    })
}

/// `τ[log M]` from the spectrum, without forming the operator logarithm.
pub fn tau_log(m: &Operator, branch: BranchConvention) -> Result<Complex64> {
    let condition = m.condition_number();
    if !(condition <= INVERTIBILITY_GATE) {
        return Err(Error::Domain(format!(
            "logarithm of a singular operator (condition estimate {condition:e})"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (vals, b) in m.eigenvalues()?.iter().zip(m.algebra().blocks()) {
        let mut s = Complex64::new(0.0, 0.0);
        for &z in vals {
            s += branch.log(z)?;
        }
        acc += s * b.weight;
    }
    Ok(acc)
}

/// Self-adjoint `arg S` with spectrum in `(-π, π]` for unitary `S`.
pub fn arg_unitary(s: &Operator) -> Result<Operator> {
    let residual = s.unitarity_residual();
    if !(residual <= UNITARY_TOL) {
        return Err(Error::Domain(format!(
            "operator is not unitary (‖S*S - I‖ = {residual:e})"
        )));
    }
    Ok(log_op(s, BranchConvention::ReCut)?.im_part())
}

/// Matrix exponential, block by block.
pub fn exp_op(x: &Operator) -> Operator {
    x.map_blocks(|m| if m.is_empty() { m.clone() } else { m.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraDescriptor;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(z: Complex64) -> Operator {
        Operator::scalar(&Arc::new(AlgebraDescriptor::factor(1).unwrap()), z)
    }

    fn entry(x: &Operator) -> Complex64 {
        x.blocks()[0][(0, 0)]
    }

    #[test]
    fn scalar_arguments() {
        let im = BranchConvention::ImCut;
        let re = BranchConvention::ReCut;
        assert!((im.arg(c(-1.0, 0.0)).unwrap() - PI).abs() < 1e-15);
        assert!((im.arg(c(-1.0, -1.0)).unwrap() - 1.25 * PI).abs() < 1e-15);
        assert!((re.arg(c(-1.0, -1.0)).unwrap() + 0.75 * PI).abs() < 1e-15);
        assert!((re.arg(c(-1.0, -1e-17)).unwrap() - PI).abs() < 1e-15);
        assert!(matches!(im.arg(c(0.0, -2.0)), Err(Error::Branch { .. })));
        assert!(matches!(im.arg(c(1e-14, -2.0)), Err(Error::Branch { .. })));
        assert!(im.arg(c(1e-6, -2.0)).is_ok());
        assert!(matches!(re.arg(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn log_examples() {
        let alg = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let i2 = Operator::scalar(&alg, c(0.0, 1.0));
        let l = log_op(&i2, BranchConvention::ImCut).unwrap();
        assert!(l.distance(&Operator::scalar(&alg, c(0.0, FRAC_PI_2))) < 1e-15);

        let minus_one = scalar(c(-1.0, 0.0));
        for b in [BranchConvention::ImCut, BranchConvention::ReCut] {
            assert!((entry(&log_op(&minus_one, b).unwrap()) - c(0.0, PI)).norm() < 1e-15);
        }
    }

    #[test]
    fn log_rejects_singular_and_cut() {
        assert!(matches!(
            log_op(&scalar(c(0.0, 0.0)), BranchConvention::ImCut),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            log_op(&scalar(c(0.0, -1.0)), BranchConvention::ImCut),
            Err(Error::Branch { .. })
        ));
    }

    #[test]
    fn integral_examples() {
        let alg = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let l = log_integral(&Operator::scalar(&alg, c(0.0, 1.0)), &QuadPolicy::default()).unwrap();
        assert!(l.distance(&Operator::scalar(&alg, c(0.0, FRAC_PI_2))) < 1e-9);
        let l2 = log_integral(&scalar(c(2.0, 0.0)), &QuadPolicy::default()).unwrap();
        assert!((entry(&l2) - c(2f64.ln(), 0.0)).norm() < 1e-9);
        assert!(log_integral(&scalar(c(0.0, -1.0)), &QuadPolicy::default()).is_err());
    }

    #[test]
    fn series_examples() {
        let alg = Arc::new(AlgebraDescriptor::factor(3).unwrap());
        let zero = log_series(&Operator::identity(&alg)).unwrap();
        assert_eq!(zero.norm(), 0.0);
        let l = log_series(&scalar(c(1.5, 0.0))).unwrap();
        assert!((entry(&l).re - 1.5f64.ln()).abs() < 1e-12);
        assert!(matches!(log_series(&scalar(c(2.5, 0.0))), Err(Error::Domain(_))));
    }

    #[test]
    fn unitary_arguments() {
        assert!((entry(&arg_unitary(&scalar(c(0.0, -1.0))).unwrap()).re + FRAC_PI_2).abs() < 1e-15);
        let alg = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let a = arg_unitary(&Operator::scalar(&alg, c(-1.0, 0.0))).unwrap();
        assert!(a.distance(&Operator::scalar(&alg, c(PI, 0.0))) < 1e-15);
        for k in 0..20 {
            let theta = -PI + 0.05 + k as f64 * (2.0 * PI - 0.1) / 19.0;
            let a = arg_unitary(&scalar(Complex64::from_polar(1.0, theta))).unwrap();
            assert!((entry(&a).re - theta).abs() < 1e-13);
        }
        assert!(arg_unitary(&scalar(c(2.0, 0.0))).is_err());
    }

    #[test]
    fn jordan_block_uses_integral_fallback() {
        let alg = Arc::new(AlgebraDescriptor::factor(2).unwrap());
        let j = Operator::new(
            alg.clone(),
            vec![Matrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)])],
        )
        .unwrap();
        let l = log_op(&j, BranchConvention::ImCut).unwrap();
        assert!(exp_op(&l).distance(&j) < 1e-8);
    }
}
