//! Characteristic functions of dissipative operators, boundary values of
//! sandwiched resolvents, and the Birman–Krein type formula
//! `det_τ S = Θ exp(-2πi ξ(H, H0))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{is_dissipative, Operator};
use crate::bschwinger::SIGN_CONVENTION;
use crate::dets::{det_tau_unitary, dlhs_det_path, OperatorPath};
use crate::eps::EpsSchedule;
use crate::error::{Error, Result};
use crate::oplog::{arg_unitary, CUT_PROXIMITY};
use crate::quad::QuadPolicy;
use crate::report::VerificationReport;
use crate::xi::{xi_index, XiOptions, KERNEL_REL_TOL};

/// Pairwise bound in the three-way dissipative identity.
pub const DISSIPATIVE_IDENTITY_TOL: f64 = 1e-8;
/// Bound for each link of the Birman–Krein chain.
pub const CHAIN_TOL: f64 = 1e-7;
/// Unitarity bound for the characteristic function.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Relative obstruction `‖E_{H0}({0}) K*‖ / ‖K‖` below which a boundary value exists.
pub const OBSTRUCTION_TOL: f64 = 1e-8;
/// Relative agreement between the pseudoinverse and the ε-extrapolation.
pub const CERTIFICATION_TOL: f64 = 1e-6;
/// Largest ratio of the first ε to the smallest nonzero |λ| of `H0` when certifying.
pub const GAP_FRACTION: f64 = 0.1;

/// `S = (iI - H)(iI + H)^{-1}` with `H = B^{1/2} A^{-1} B^{1/2}`.
#[derive(Debug, Clone)]
pub struct CharFunction {
    pub s: Operator,
    pub generator: Operator,
    /// The resolvent form `I - 2i B^{1/2}(A + iB)^{-1} B^{1/2}`, when
    /// `A + iB` is invertible. It equals `S*`.
    pub resolvent_form: Option<Operator>,
    pub unitarity_residual: f64,
    /// `min |λ + 1|` over the spectrum of `S`.
    pub distance_to_minus_one: f64,
}

pub fn char_function(a: &Operator, b: &Operator) -> Result<CharFunction> {
    a.check_same_algebra(b)?;
    if !a.is_self_adjoint() || !b.is_self_adjoint() {
        return Err(Error::Domain("characteristic function needs self-adjoint A and B".into()));
    }
    let a_inv = a
        .inv()
        .map_err(|_| Error::Domain("A is singular".into()))?;
    let sqrt_b = b.psd_sqrt_at_scale(a.norm().max(1.0))?;
    let h = (&(&sqrt_b * &a_inv) * &sqrt_b).re_part();
    let i = Complex64::new(0.0, 1.0);
    let s = &(-&h).shift(i) * &h.shift(i).inv()?;
    let unitarity_residual = s.unitarity_residual();
    if !(unitarity_residual <= UNITARITY_TOL) {
        return Err(Error::Numeric(format!(
            "characteristic function is not unitary (residual {unitarity_residual:e})"
        )));
    }
    let distance_to_minus_one = s
        .eigenvalues()?
        .into_iter()
        .flatten()
        .map(|l| (l + 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    if distance_to_minus_one <= CUT_PROXIMITY {
        return Err(Error::Domain("-1 lies in the spectrum of the characteristic function".into()));
    }
    let resolvent_form = (a + &b.scale(i)).inv().ok().map(|r| {
        let id = Operator::identity(a.algebra());
        &id - &(&(&sqrt_b * &r) * &sqrt_b).scale(Complex64::new(0.0, 2.0))
    });
    Ok(CharFunction {
        s,
        generator: h,
        resolvent_form,
        unitarity_residual,
        distance_to_minus_one,
    })
}

fn tau_arg_over_2pi(u: &Operator) -> Result<f64> {
    Ok(arg_unitary(u)?.tau().re / (2.0 * PI))
}

/// `ξ(A, A + iB) = (1/π) τ[arctan H] = (1/2π) τ[arg S]`.
pub fn xi_dissipative_identity(a: &Operator, b: &Operator) -> Result<VerificationReport> {
    let cf = char_function(a, b)?;
    let dissipative = a + &b.scale(Complex64::new(0.0, 1.0));
    if !dissipative.is_invertible() {
        return Err(Error::Domain("A + iB is singular".into()));
    }
    let xi = xi_index(a, &dissipative, &XiOptions::default())?;
    let arctan = cf.generator.apply_hermitian(f64::atan)?.tau().re / PI;
    let arg = tau_arg_over_2pi(&cf.s)?;
    let mut r = VerificationReport::new("dissipative index via characteristic function", "scattering.three-way", a.algebra());
    r.check("xi(A, A + iB) = tau[arctan H] / pi", xi, arctan, DISSIPATIVE_IDENTITY_TOL)
        .check("tau[arctan H] / pi = tau[arg S] / 2pi", arctan, arg, DISSIPATIVE_IDENTITY_TOL)
        .check("xi(A, A + iB) = tau[arg S] / 2pi", xi, arg, DISSIPATIVE_IDENTITY_TOL)
        .text("convention", "S = (iI - H)(iI + H)^-1, H = B^1/2 A^-1 B^1/2");
    if let Some(alt) = &cf.resolvent_form {
        r.real("resolvent_form_adjoint_distance", alt.distance(&cf.s.adjoint()));
        if let Ok(alt_arg) = tau_arg_over_2pi(alt) {
            r.real("resolvent_form_tau_arg_over_2pi", alt_arg);
            if (alt_arg - arg).abs() > DISSIPATIVE_IDENTITY_TOL {
                r.warn(format!(
                    "resolvent form I - 2i B^1/2 (A + iB)^-1 B^1/2 gives tau[arg]/2pi = {alt_arg}, the negative of the Cayley form"
                ));
            }
        }
    }
    if a.algebra().total_dim() == 1 {
        r.complex("s", cf.s.blocks()[0][(0, 0)]);
        if let Some(alt) = &cf.resolvent_form {
            r.complex("s_resolvent_form", alt.blocks()[0][(0, 0)]);
        }
    }
    Ok(r)
}

/// A certified boundary value `K (H0 + i0)^{-1} K*`.
#[derive(Debug, Clone)]
pub struct BoundaryValue {
    pub value: Operator,
    /// `‖E_{H0}({0}) K*‖`.
    pub obstruction: f64,
    /// Distance to the ε-extrapolated value, relative to `max(‖value‖, 1)`.
    pub certification: f64,
    pub history: Vec<f64>,
}

/// `lim_{ε↓0} K (H0 + iε)^{-1} K*` for self-adjoint `H0`, via the
/// pseudoinverse on the complement of the kernel.
pub fn boundary_resolvent(h0: &Operator, k: &Operator, sched: &EpsSchedule) -> Result<BoundaryValue> {
    h0.check_same_algebra(k)?;
    let eig = h0.hermitian_eigen()?;
    let threshold = KERNEL_REL_TOL * eig.max_abs_eigenvalue();
    let kernel = eig.projection(|l| l.abs() <= threshold);
    let ks = k.adjoint();
    let obstruction = (&kernel * &ks).norm();
    let i = Complex64::new(0.0, 1.0);
    let sandwich = |e: f64| -> Result<Operator> { Ok(&(k * &h0.shift(i * e).inv()?) * &ks) };

    if obstruction > OBSTRUCTION_TOL * k.norm() {
        let history = sched
            .values()
            .iter()
            .map(|&e| sandwich(e).map(|x| x.norm()))
            .collect::<Result<Vec<_>>>()?;
        return Err(Error::NoBoundaryValue { obstruction, history });
    }
    let pinv = eig.apply(|l| {
        if l.abs() <= threshold {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / l, 0.0)
        }
    });
    let value = &(k * &pinv) * &ks;
    // The iterates only settle once ε is well below the smallest nonzero
    // |λ|, so the certifying schedule is shrunk to sit under the gap.
    let gap = eig
        .values
        .iter()
        .flatten()
        .map(|l| l.abs())
        .filter(|&l| l > threshold)
        .fold(f64::INFINITY, f64::min);
    let start = sched.values()[0];
    let sched = if gap.is_finite() && start > GAP_FRACTION * gap {
        sched.rescaled(GAP_FRACTION * gap / start)?
    } else {
        sched.clone()
    };
    let limit = sched.limit("K (H0 + i eps)^-1 K*", sandwich)?;
    let certification = limit.value.distance(&value) / value.norm().max(1.0);
    if !(certification <= CERTIFICATION_TOL) {
        return Err(Error::Numeric(format!(
            "pseudoinverse boundary value disagrees with the epsilon limit ({certification:e})"
        )));
    }
    Ok(BoundaryValue {
        value,
        obstruction,
        certification,
        history: limit.differences,
    })
}

/// Self-adjoint `H0`, coupling `K`, self-adjoint invertible `N`.
#[derive(Debug, Clone)]
pub struct BKInstance {
    pub h0: Operator,
    pub k: Operator,
    pub n: Operator,
}

impl BKInstance {
    pub fn new(h0: Operator, k: Operator, n: Operator) -> Result<Self> {
        h0.check_same_algebra(&k)?;
        h0.check_same_algebra(&n)?;
        if !h0.is_self_adjoint() {
            return Err(Error::Domain("H0 is not self-adjoint".into()));
        }
        if !n.is_self_adjoint() {
            return Err(Error::Domain("N is not self-adjoint".into()));
        }
        if !n.is_invertible() {
            return Err(Error::Domain("N is singular".into()));
        }
        Ok(Self { h0, k, n })
    }

    /// `H = H0 - K* N^{-1} K`.
    pub fn perturbed(&self) -> Result<Operator> {
        let ks = self.k.adjoint();
        Ok((&self.h0 - &(&(&ks * &self.n.inv()?) * &self.k)).re_part())
    }

    /// `𝒩 = N - K (H0 + i0)^{-1} K*`.
    pub fn boundary_operator(&self, sched: &EpsSchedule) -> Result<Operator> {
        let bv = boundary_resolvent(&self.h0, &self.k, sched).map_err(|e| match e {
            Error::NoBoundaryValue { obstruction, .. } => Error::Hypothesis(format!(
                "boundary value K (H0 + i0)^-1 K* does not exist (obstruction {obstruction:e})"
            )),
            other => other,
        })?;
        Ok(&self.n - &bv.value)
    }
}

/// Every link of `ξ(H0, H) = ξ(N, 𝒩) = ξ(N, Re𝒩) + ξ(Re𝒩, 𝒩)`,
/// `ξ(Re𝒩, 𝒩) = τ[arg S]/2π`, and the assembled determinant formula.
pub fn birman_krein(inst: &BKInstance, sched: &EpsSchedule) -> Result<VerificationReport> {
    let cal_n = inst.boundary_operator(sched)?;
    let h = inst.perturbed()?;
    let opts = XiOptions::default();
    let xi_h0_h = xi_index(&inst.h0, &h, &opts)?;
    let mut r = VerificationReport::new("Birman-Krein formula", "scattering.birman-krein", inst.h0.algebra());
    r.text("sign_convention", SIGN_CONVENTION).real("xi_h0_h", xi_h0_h);
    let xi_n_cal = xi_index(&inst.n, gate(&cal_n)?, &opts)?;
    r.check("xi(H0, H) = xi(N, N(0))", xi_h0_h, xi_n_cal, CHAIN_TOL);
    chain(&mut r, &inst.n, &cal_n, xi_h0_h)?;
    Ok(r)
}

/// The chain for a prescribed boundary operator `𝒩` with `Im 𝒩 ≻ 0`;
/// `ξ(H0, H)` is replaced by `ξ(N, 𝒩)`.
pub fn birman_krein_synthetic(n: &Operator, cal_n: &Operator) -> Result<VerificationReport> {
    n.check_same_algebra(cal_n)?;
    if !n.is_self_adjoint() || !n.is_invertible() {
        return Err(Error::Domain("N must be self-adjoint and invertible".into()));
    }
    let im_min = cal_n.im_part().hermitian_eigen()?.min_eigenvalue();
    if !(im_min > 0.0) {
        return Err(Error::Hypothesis(format!(
            "prescribed boundary operator needs Im N(0) > 0 (λ_min = {im_min:e})"
        )));
    }
    let xi_n_cal = xi_index(n, gate(cal_n)?, &XiOptions::default())?;
    let mut r = VerificationReport::new("Birman-Krein formula (prescribed boundary data)", "scattering.birman-krein", n.algebra());
    r.text("sign_convention", SIGN_CONVENTION).real("xi_n_boundary", xi_n_cal);
    chain(&mut r, n, cal_n, xi_n_cal)?;
    Ok(r)
}

fn gate(cal_n: &Operator) -> Result<&Operator> {
    if !is_dissipative(cal_n) {
        return Err(Error::Hypothesis("boundary operator is not dissipative".into()));
    }
    if !cal_n.is_invertible() {
        return Err(Error::Hypothesis("boundary operator is not invertible".into()));
    }
    if !cal_n.re_part().is_invertible() {
        return Err(Error::Hypothesis("real part of the boundary operator is not invertible".into()));
    }
    Ok(cal_n)
}

fn chain(r: &mut VerificationReport, n: &Operator, cal_n: &Operator, xi_h0_h: f64) -> Result<()> {
    let opts = XiOptions::default();
    let re = cal_n.re_part();
    let im = cal_n.im_part();
    let xi_n_cal = xi_index(n, cal_n, &opts)?;
    let xi_n_re = xi_index(n, &re, &opts)?;
    let xi_re_cal = xi_index(&re, cal_n, &opts)?;
    let cf = char_function(&re, &im)?;
    let arg_term = tau_arg_over_2pi(&cf.s)?;
    let id = Operator::identity(n.algebra());
    let det_path = dlhs_det_path(&OperatorPath::linear(&id, &cf.s)?, &QuadPolicy::default())?;
    let det_closed = det_tau_unitary(&cf.s)?;
    let theta = Complex64::new(0.0, -2.0 * PI * xi_n_re).exp();
    // ξ(H, H0) = -ξ(H0, H).
    let rhs = theta * Complex64::new(0.0, 2.0 * PI * xi_h0_h).exp();

    r.check("xi(N, N(0)) = xi(N, Re N(0)) + xi(Re N(0), N(0))", xi_n_cal, xi_n_re + xi_re_cal, CHAIN_TOL)
        .check("xi(Re N(0), N(0)) = tau[arg S] / 2pi", xi_re_cal, arg_term, CHAIN_TOL)
        .check("det_tau S along tS + (1-t)I = exp(i tau[arg S])", det_path.value, Complex64::new(0.0, 2.0 * PI * arg_term).exp(), CHAIN_TOL)
        .check("det_tau S along tS + (1-t)I = closed form", det_path.value, det_closed, CHAIN_TOL)
        .check("det_tau S = Theta exp(-2 pi i xi(H, H0))", det_path.value, rhs, CHAIN_TOL)
        .check_that("xi(N, Re N(0)) lies in [-1, 1]", (-1.0..=1.0).contains(&xi_n_re));
    r.complex("det_s", det_path.value)
        .complex("theta", theta)
        .real("xi_n_re", xi_n_re)
        .real("xi_re_boundary", xi_re_cal)
        .real("tau_arg_s_over_2pi", arg_term)
        .real("distance_to_minus_one", cf.distance_to_minus_one)
        .text("degenerate", if im.norm() <= 1e-12 { "true" } else { "false" });
    let frac = xi_n_re.fract().abs();
    if (frac - 0.5).abs() < 1e-9 {
        r.warn(format!("xi(N, Re N(0)) = {xi_n_re} sits on a half-integer"));
    }
    Ok(())
}
