//! Fuglede–Kadison determinants, path determinants
//! `exp(∫_0^1 τ[Ḣ_t H_t^{-1}] dt)`, and their closed forms on dissipative
//! and unitary endpoints.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{spectral, AlgebraDescriptor, Operator, INVERTIBILITY_GATE};
use crate::error::{Error, Result};
use crate::oplog::{tau_log, BranchConvention, UNITARY_TOL};
use crate::quad::{integrate, QuadPolicy};
use crate::report::VerificationReport;
use crate::xi::{tau_xi, XiOptions};

/// Fewest samples accepted for a sampled path.
pub const MIN_SAMPLES: usize = 33;
/// Residual bound for the polar identity.
pub const POLAR_TOL: f64 = 1e-8;

type PathFn = Arc<dyn Fn(f64) -> Result<Operator> + Send + Sync>;

/// How a path `t ↦ H_t` on `[0, 1]` is represented.
#[derive(Clone)]
pub enum PathKind {
    /// `(1 - t) H0 + t H1`.
    Linear { h0: Operator, h1: Operator },
    /// `(iI - tH)(iI + tH)^{-1}` for self-adjoint `H`.
    CayleyScaled { h: Operator },
    /// Samples `(t_k, H_k)`; derivatives by finite differences.
    Sampled { ts: Vec<f64>, values: Vec<Operator> },
    /// Straight legs through the vertices, one leg per `1/L` of parameter.
    Polyline { vertices: Vec<Operator> },
    /// Closed-form value and derivative.
    Analytic { value: PathFn, derivative: PathFn },
}

impl fmt::Debug for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::Linear { .. } => f.write_str("Linear"),
            PathKind::CayleyScaled { .. } => f.write_str("CayleyScaled"),
            PathKind::Sampled { ts, .. } => write!(f, "Sampled({} samples)", ts.len()),
            PathKind::Polyline { vertices } => write!(f, "Polyline({} vertices)", vertices.len()),
            PathKind::Analytic { .. } => f.write_str("Analytic"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorPath {
    alg: Arc<AlgebraDescriptor>,
    kind: PathKind,
}

impl OperatorPath {
    pub fn linear(h0: &Operator, h1: &Operator) -> Result<Self> {
        h0.check_same_algebra(h1)?;
        Ok(Self {
            alg: h0.algebra().clone(),
            kind: PathKind::Linear {
                h0: h0.clone(),
                h1: h1.clone(),
            },
        })
    }

    pub fn cayley_scaled(h: &Operator) -> Result<Self> {
        if !h.is_self_adjoint() {
            return Err(Error::Domain("Cayley path needs a self-adjoint generator".into()));
        }
        Ok(Self {
            alg: h.algebra().clone(),
            kind: PathKind::CayleyScaled { h: h.clone() },
        })
    }

    pub fn sampled(samples: Vec<(f64, Operator)>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "sampled path needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        let (ts, values): (Vec<f64>, Vec<Operator>) = samples.into_iter().unzip();
        if ts[0] != 0.0 || *ts.last().unwrap() != 1.0 {
            return Err(Error::Domain("sampled path must start at t = 0 and end at t = 1".into()));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
        for v in &values[1..] {
            values[0].check_same_algebra(v)?;
        }
        Ok(Self {
            alg: values[0].algebra().clone(),
            kind: PathKind::Sampled { ts, values },
        })
    }

    pub fn polyline(vertices: Vec<Operator>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Domain("polyline needs at least two vertices".into()));
        }
        for v in &vertices[1..] {
            vertices[0].check_same_algebra(v)?;
        }
        Ok(Self {
            alg: vertices[0].algebra().clone(),
            kind: PathKind::Polyline { vertices },
        })
    }

    pub fn analytic<F, G>(alg: &Arc<AlgebraDescriptor>, value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> Result<Operator> + Send + Sync + 'static,
        G: Fn(f64) -> Result<Operator> + Send + Sync + 'static,
    {
        Self {
            alg: alg.clone(),
            kind: PathKind::Analytic {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
        }
    }

    /// Pointwise product `t ↦ P_t Q_t`.
    pub fn product(p: &OperatorPath, q: &OperatorPath) -> Result<Self> {
        if p.alg != q.alg {
            return Err(Error::Structural("paths live in different algebras".into()));
        }
        let (p1, q1, p2, q2) = (p.clone(), q.clone(), p.clone(), q.clone());
        Ok(Self::analytic(
            &p.alg,
            move |t| Ok(&p1.at(t)? * &q1.at(t)?),
            move |t| Ok(&(&p2.derivative(t)? * &q2.at(t)?) + &(&p2.at(t)? * &q2.derivative(t)?)),
        ))
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn algebra(&self) -> &Arc<AlgebraDescriptor> {
        &self.alg
    }

    pub fn at(&self, t: f64) -> Result<Operator> {
        match &self.kind {
            PathKind::Linear { h0, h1 } => Ok(&h0.scale_real(1.0 - t) + &h1.scale_real(t)),
            PathKind::CayleyScaled { h } => {
                let i = Complex64::new(0.0, 1.0);
                let th = h.scale_real(t);
                Ok(&(-&th).shift(i) * &th.shift(i).inv()?)
            }
            PathKind::Sampled { ts, values } => {
                let k = segment(ts, t);
                let s = (t - ts[k]) / (ts[k + 1] - ts[k]);
                Ok(&values[k].scale_real(1.0 - s) + &values[k + 1].scale_real(s))
            }
            PathKind::Polyline { vertices } => {
                let (k, s) = leg(vertices.len() - 1, t);
                Ok(&vertices[k].scale_real(1.0 - s) + &vertices[k + 1].scale_real(s))
            }
            PathKind::Analytic { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<Operator> {
        match &self.kind {
            PathKind::Linear { h0, h1 } => Ok(h1 - h0),
            PathKind::CayleyScaled { h } => {
                // U_t = 2i (iI + tH)^{-1} - I, so U̇_t = -2i A^{-1} H A^{-1}.
                let a_inv = h.scale_real(t).shift(Complex64::new(0.0, 1.0)).inv()?;
                Ok((&(&a_inv * h) * &a_inv).scale(Complex64::new(0.0, -2.0)))
            }
            PathKind::Sampled { ts, values } => {
                let k = segment(ts, t);
                let s = (t - ts[k]) / (ts[k + 1] - ts[k]);
                let d0 = sampled_derivative(ts, values, k);
                let d1 = sampled_derivative(ts, values, k + 1);
                Ok(&d0.scale_real(1.0 - s) + &d1.scale_real(s))
            }
            PathKind::Polyline { vertices } => {
                let legs = vertices.len() - 1;
                let (k, _) = leg(legs, t);
                Ok((&vertices[k + 1] - &vertices[k]).scale_real(legs as f64))
            }
            PathKind::Analytic { derivative, .. } => derivative(t),
        }
    }

    /// Parameter values where the path may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PathKind::Polyline { vertices } => {
                let legs = vertices.len() - 1;
                (0..=legs).map(|k| k as f64 / legs as f64).collect()
            }
            _ => vec![0.0, 1.0],
        }
    }
}

fn segment(ts: &[f64], t: f64) -> usize {
    match ts.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(i) => i.min(ts.len() - 2),
        Err(i) => i.saturating_sub(1).min(ts.len() - 2),
    }
}

fn leg(legs: usize, t: f64) -> (usize, f64) {
    let x = t.clamp(0.0, 1.0) * legs as f64;
    let k = (x.floor() as usize).min(legs - 1);
    (k, x - k as f64)
}

/// Second-order finite difference at sample `k`: central inside, one-sided
/// three-point at the ends.
fn sampled_derivative(ts: &[f64], values: &[Operator], k: usize) -> Operator {
    let n = ts.len();
    let (i0, i1, i2) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let (x0, x1, x2, x) = (ts[i0], ts[i1], ts[i2], ts[k]);
    // Derivative of the quadratic interpolant through the three samples.
    let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let w1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    &(&values[i0].scale_real(w0) + &values[i1].scale_real(w1)) + &values[i2].scale_real(w2)
}

/// A path determinant together with its unreduced logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDeterminant {
    pub value: Complex64,
    /// `∫ τ[Ḣ H^{-1}] dt`; the imaginary part is the accumulated phase.
    pub log: Complex64,
    pub error_estimate: f64,
}

impl PathDeterminant {
    pub fn winding(&self) -> f64 {
        self.log.im / (2.0 * PI)
    }
}

fn log_derivative(path: &OperatorPath, t: f64) -> Result<Complex64> {
    let h = path.at(t)?;
    let condition = h.condition_number();
    if !(condition <= INVERTIBILITY_GATE) {
        return Err(Error::SingularPath { t, condition });
    }
    let h_inv = h.inv().map_err(|_| Error::SingularPath { t, condition })?;
    Ok((&path.derivative(t)? * &h_inv).tau())
}

/// `exp(∫_0^1 τ[Ḣ_t H_t^{-1}] dt)` with the phase accumulated continuously.
pub fn dlhs_det_path(path: &OperatorPath, policy: &QuadPolicy) -> Result<PathDeterminant> {
    let (log, error_estimate) = match &path.kind {
        PathKind::Sampled { ts, .. } => {
            let g = ts
                .iter()
                .map(|&t| log_derivative(path, t))
                .collect::<Result<Vec<_>>>()?;
            let fine = trapezoid(ts, &g, 1);
            let coarse = trapezoid(ts, &g, 2);
            (fine, (fine - coarse).norm())
        }
        _ => {
            let cuts = path.breakpoints();
            let mut log = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            for w in cuts.windows(2) {
                let q = integrate(|t| log_derivative(path, t), w[0], w[1], policy)?;
                log += q.value;
                err += q.error_estimate;
            }
            (log, err)
        }
    };
    Ok(PathDeterminant {
        value: log.exp(),
        log,
        error_estimate,
    })
}

/// Trapezoid rule on every `stride`-th sample, always including the last.
fn trapezoid(ts: &[f64], g: &[Complex64], stride: usize) -> Complex64 {
    let mut idx: Vec<usize> = (0..ts.len()).step_by(stride).collect();
    if *idx.last().unwrap() != ts.len() - 1 {
        idx.push(ts.len() - 1);
    }
    idx.windows(2)
        .map(|w| (g[w[0]] + g[w[1]]) * (0.5 * (ts[w[1]] - ts[w[0]])))
        .sum()
}

/// `Δ(A) = exp(½ τ[log(A*A)])`.
pub fn fk_det(a: &Operator) -> Result<f64> {
    if !a.is_invertible() {
        return Err(Error::Domain(format!(
            "Fuglede–Kadison determinant of a singular operator (condition estimate {:e})",
            a.condition_number()
        )));
    }
    let sd = spectral(&(&a.adjoint() * a), None)?;
    let log_tau: f64 = sd
        .eigenvalues
        .iter()
        .zip(&sd.projections)
        .map(|(&l, p)| l.ln() * p.tau().re)
        .sum();
    Ok((0.5 * log_tau).exp())
}

/// `exp(τ[log M])` on the imaginary-cut branch: the determinant along any
/// path from `I` to `M` through invertible dissipative operators.
pub fn det_tau_dissipative(m: &Operator) -> Result<Complex64> {
    if !crate::algebra::is_dissipative(m) {
        return Err(Error::Domain("operator is not dissipative".into()));
    }
    Ok(tau_log(m, BranchConvention::ImCut)?.exp())
}

/// `exp(τ[log U])` on the real-cut branch, for unitary `U`.
pub fn det_tau_unitary(u: &Operator) -> Result<Complex64> {
    let residual = u.unitarity_residual();
    if !(residual <= UNITARY_TOL) {
        return Err(Error::Domain(format!(
            "operator is not unitary (‖U*U - I‖ = {residual:e})"
        )));
    }
    Ok(tau_log(u, BranchConvention::ReCut)?.exp())
}

/// A path from `I` to `M` inside the invertible dissipative operators.
#[derive(Debug, Clone)]
pub struct InClassPath {
    pub path: OperatorPath,
    /// The straight segment was unusable and `I → iρI → M` was taken.
    pub two_leg: bool,
}

/// The straight segment `I → M` when it stays well inside the invertible
/// operators, else the two-leg path through `i max(‖M‖, 1) I`.
pub fn dissipative_path(m: &Operator) -> Result<InClassPath> {
    if !crate::algebra::is_dissipative(m) {
        return Err(Error::Domain("operator is not dissipative".into()));
    }
    let id = Operator::identity(m.algebra());
    let scale = m.norm().max(1.0);
    // (1-t) + tλ vanishes only for λ on the closed negative half-line.
    let gap = m
        .eigenvalues()?
        .into_iter()
        .flatten()
        .map(|l| if l.re <= 0.0 { l.im.abs() } else { l.norm() })
        .fold(f64::INFINITY, f64::min);
    if gap > 1e-2 * scale {
        return Ok(InClassPath {
            path: OperatorPath::linear(&id, m)?,
            two_leg: false,
        });
    }
    let top = Operator::scalar(m.algebra(), Complex64::new(0.0, scale));
    Ok(InClassPath {
        path: OperatorPath::polyline(vec![id, top, m.clone()])?,
        two_leg: true,
    })
}

/// `det_τ M = exp(iπ τ[Ξ(M)]) Δ(M)`.
pub fn polar_identity_check(m: &Operator) -> Result<VerificationReport> {
    let lhs = det_tau_dissipative(m)?;
    let xi = tau_xi(m, &XiOptions::default())?;
    let delta = fk_det(m)?;
    let rhs = Complex64::new(0.0, PI * xi.value).exp() * delta;
    let mut r = VerificationReport::new("polar determinant identity", "dets.polar", m.algebra());
    r.check("det_tau(M) = exp(i pi tau[Xi(M)]) Delta(M)", lhs, rhs, POLAR_TOL)
        .real("tau_xi", xi.value)
        .real("fk_det", delta)
        .warn_all(xi.warnings);
    Ok(r)
}
