//! Schur complements of the operator matrix `𝐌 = (M K*; K N)` and the
//! Birman–Schwinger identities relating their ξ-indices.
//!
//! Sign convention throughout: `H = H0 - K* N^{-1} K`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::algebra::{block2, is_dissipative, Isometry, Operator};
use crate::eps::EpsSchedule;
use crate::error::{Error, Result};
use crate::oplog::{tau_log, BranchConvention};
use crate::report::VerificationReport;
use crate::scattering::boundary_resolvent;
use crate::xi::{negative_and_kernel_projections, tau_fredholm_index, tau_xi, xi_index, XiOptions};

pub const SIGN_CONVENTION: &str = "H = H0 - K* N^{-1} K";
/// Residual bound for the unregularized identity and the block corollary.
pub const BS_TOL: f64 = 1e-8;
/// Residual bound for identities between `ε ↓ 0` limits.
pub const LIMIT_TOL: f64 = 1e-6;
/// Residual bound for the resolvent identity and inverse-block checks.
pub const RESOLVENT_TOL: f64 = 1e-9;
/// Counting identities are exact up to rounding.
const COUNT_TOL: f64 = 1e-12;
/// Reconstruction bound for `factor_perturbation`.
pub const FACTOR_TOL: f64 = 1e-10;

/// Dissipative `M`, `N` and a coupling `K` over one algebra.
#[derive(Debug, Clone)]
pub struct BSInstance {
    pub m: Operator,
    pub n: Operator,
    pub k: Operator,
}

impl BSInstance {
    pub fn new(m: Operator, n: Operator, k: Operator) -> Result<Self> {
        m.check_same_algebra(&n)?;
        m.check_same_algebra(&k)?;
        for (name, x) in [("M", &m), ("N", &n)] {
            if !is_dissipative(x) {
                return Err(Error::Domain(format!("{name} is not dissipative")));
            }
        }
        Ok(Self { m, n, k })
    }

    /// `(N, M, K*)`: the instance seen through the block swap `(0 I; I 0)`.
    pub fn swapped(&self) -> Self {
        Self {
            m: self.n.clone(),
            n: self.m.clone(),
            k: self.k.adjoint(),
        }
    }

    pub fn block_matrix(&self) -> Result<Operator> {
        block2(&self.m, &self.k, &self.n)
    }

    /// `M - K* N^{-1} K` and `N - K M^{-1} K*`.
    fn complements_at_zero(&self) -> Result<(Operator, Operator)> {
        schur_complements(self, Complex64::new(0.0, 0.0))
    }
}

fn invert(name: &str, x: &Operator) -> Result<Operator> {
    x.inv()
        .map_err(|_| Error::Domain(format!("{name} is singular (condition estimate {:e})", x.condition_number())))
}

/// `ℳ(z) = M + z - K*(N + z)^{-1}K` and `𝒩(z) = N + z - K(M + z)^{-1}K*`.
pub fn schur_complements(inst: &BSInstance, z: Complex64) -> Result<(Operator, Operator)> {
    let mz = inst.m.shift(z);
    let nz = inst.n.shift(z);
    let nz_inv = invert("N + zI", &nz)?;
    let mz_inv = invert("M + zI", &mz)?;
    let ks = inst.k.adjoint();
    let cal_m = &mz - &(&(&ks * &nz_inv) * &inst.k);
    let cal_n = &nz - &(&(&inst.k * &mz_inv) * &ks);
    Ok((cal_m, cal_n))
}

/// Largest distance between the diagonal blocks of `𝐌(z)^{-1}` and the
/// inverses of the Schur complements, relative to their size.
pub fn schur_block_residual(inst: &BSInstance, z: Complex64) -> Result<f64> {
    let (cal_m, cal_n) = schur_complements(inst, z)?;
    let bold = block2(&inst.m.shift(z), &inst.k, &inst.n.shift(z))?;
    let inv = invert("𝐌(z)", &bold)?;
    let mut worst: f64 = 0.0;
    for (iso, comp) in [(Isometry::First, &cal_m), (Isometry::Second, &cal_n)] {
        let block = iso.compress(&inv)?;
        let direct = invert("Schur complement", comp)?;
        worst = worst.max(block.distance(&direct) / direct.norm().max(1.0));
    }
    Ok(worst)
}

/// `ξ(M, M - K*N^{-1}K) = ξ(N, N - KM^{-1}K*)`.
pub fn verify_bs(inst: &BSInstance) -> Result<VerificationReport> {
    let mut singular = Vec::new();
    for (name, x) in [("M", &inst.m), ("N", &inst.n)] {
        if !x.is_invertible() {
            singular.push(name);
        }
    }
    if !singular.is_empty() {
        return Err(Error::Domain(format!("singular operators: {}", singular.join(", "))));
    }
    let (cal_m, cal_n) = inst.complements_at_zero()?;
    let mut r = VerificationReport::new("Birman-Schwinger identity", "bs.schur-complement-invariance", inst.m.algebra());
    r.text("sign_convention", SIGN_CONVENTION);
    let (m_ok, n_ok) = (cal_m.is_invertible(), cal_n.is_invertible());
    if !(m_ok && n_ok) {
        if m_ok == n_ok {
            return Err(Error::Domain(
                "singular operators: M - K*N^{-1}K, N - KM^{-1}K*".into(),
            ));
        }
        r.check_that("Schur complements are invertible together", false)
            .real("cond_M_complement", cal_m.condition_number())
            .real("cond_N_complement", cal_n.condition_number());
        return Ok(r);
    }
    let opts = XiOptions::default();
    let lhs = xi_index(&inst.m, &cal_m, &opts)?;
    let rhs = xi_index(&inst.n, &cal_n, &opts)?;
    r.check("xi(M, M - K*N^-1 K) = xi(N, N - K M^-1 K*)", lhs, rhs, BS_TOL);
    Ok(r)
}

/// Which regularized form of the identity `bs_limit` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// `lim ξ(M_ε, M_ε - K*N_ε^{-1}K) = lim ξ(N_ε, N_ε - K M_ε^{-1} K*)`.
    BothRegularized,
    /// `ξ(M, M - K*N^{-1}K) = lim ξ(N, N - K(M + iε)^{-1}K*)`.
    NInvertible,
    /// `ξ(M, M - K*N^{-1}K) = ξ(N, N - K(M + i0)^{-1}K*)`.
    Boundary,
}

fn xi_along(
    sched: &EpsSchedule,
    what: &str,
    f: impl Fn(f64) -> Result<(Operator, Operator)>,
) -> Result<crate::eps::Limit<f64>> {
    let opts = XiOptions::default();
    sched.limit(what, |e| {
        let (a, b) = f(e)?;
        xi_index(&a, &b, &opts)
    })
}

pub fn bs_limit(inst: &BSInstance, sched: &EpsSchedule, mode: LimitMode) -> Result<VerificationReport> {
    let opts = XiOptions::default();
    let i = Complex64::new(0.0, 1.0);
    let ks = inst.k.adjoint();
    let mut r = VerificationReport::new("regularized Birman-Schwinger identity", "bs.limit", inst.m.algebra());
    r.text("sign_convention", SIGN_CONVENTION)
        .text("mode", &format!("{mode:?}"))
        .series("eps", sched.values().to_vec());

    // ξ(N, N - K(M + iε)^{-1}K*) along the schedule.
    let right_n_fixed = |r: &mut VerificationReport| -> Result<f64> {
        let limit = xi_along(sched, "xi(N, N - K(M + i eps)^-1 K*)", |e| {
            let m_inv = inst.m.shift(i * e).inv()?;
            Ok((inst.n.clone(), &inst.n - &(&(&inst.k * &m_inv) * &ks)))
        })?;
        r.series("rhs_samples", limit.samples.clone())
            .series("rhs_differences", limit.differences.clone());
        Ok(limit.value)
    };
    let left_fixed = || -> Result<f64> {
        let n_inv = invert("N", &inst.n)?;
        xi_index(&inst.m, &(&inst.m - &(&(&ks * &n_inv) * &inst.k)), &opts)
    };

    let (lhs, rhs) = match mode {
        LimitMode::BothRegularized => {
            let left = xi_along(sched, "xi(M_eps, M_eps - K* N_eps^-1 K)", |e| {
                let me = inst.m.shift(i * e);
                let ne_inv = inst.n.shift(i * e).inv()?;
                let comp = &me - &(&(&ks * &ne_inv) * &inst.k);
                Ok((me, comp))
            })?;
            let right = xi_along(sched, "xi(N_eps, N_eps - K M_eps^-1 K*)", |e| {
                let ne = inst.n.shift(i * e);
                let me_inv = inst.m.shift(i * e).inv()?;
                let comp = &ne - &(&(&inst.k * &me_inv) * &ks);
                Ok((ne, comp))
            })?;
            r.series("lhs_samples", left.samples.clone())
                .series("lhs_differences", left.differences.clone())
                .series("rhs_samples", right.samples.clone())
                .series("rhs_differences", right.differences.clone());
            (left.value, right.value)
        }
        LimitMode::NInvertible => {
            let lhs = left_fixed()?;
            (lhs, right_n_fixed(&mut r)?)
        }
        LimitMode::Boundary => {
            let lhs = left_fixed()?;
            let boundary = if inst.m.is_self_adjoint() {
                boundary_resolvent(&inst.m, &inst.k, sched)?.value
            } else {
                sched
                    .limit("K (M + i eps)^-1 K*", |e| {
                        Ok(&(&inst.k * &inst.m.shift(i * e).inv()?) * &ks)
                    })?
                    .value
            };
            let cal_n = &inst.n - &boundary;
            if !cal_n.is_invertible() {
                return Err(Error::Domain("boundary operator N - K(M + i0)^-1 K* is singular".into()));
            }
            (lhs, xi_index(&inst.n, &cal_n, &opts)?)
        }
    };
    r.check("regularized identity", lhs, rhs, LIMIT_TOL);

    let invertible = inst.m.is_invertible() && inst.n.is_invertible();
    if invertible {
        if let Ok(plain) = verify_bs(inst) {
            if let (Some(l), Some(rv)) = (plain.lhs, plain.rhs) {
                r.check("agrees with unregularized left side", lhs, l, LIMIT_TOL)
                    .check("agrees with unregularized right side", rhs, rv, LIMIT_TOL);
            }
        }
    }
    Ok(r)
}

/// The block-matrix corollary: `2τ⁽²⁾[Ξ(𝐌)]` against Ξ-traces of the
/// diagonal corners and the Schur complements.
pub fn block_corollary(inst: &BSInstance) -> Result<VerificationReport> {
    let opts = XiOptions::default();
    let txi = |x: &Operator| tau_xi(x, &opts).map(|t| t.value);
    let bold = inst.block_matrix()?;
    let bold_inv = invert("𝐌", &bold)?;
    let (cal_m, cal_n) = inst.complements_at_zero()?;
    let u_block = Isometry::First.compress(&bold_inv)?;
    let w_block = Isometry::Second.compress(&bold_inv)?;
    let u_inv = invert("U*𝐌^{-1}U", &u_block)?;
    let w_inv = invert("W*𝐌^{-1}W", &w_block)?;
    let u_m = Isometry::First.compress(&bold)?;
    let w_m = Isometry::Second.compress(&bold)?;

    let two_tau2 = 2.0 * txi(&bold)?;
    let (xm, xn) = (txi(&inst.m)?, txi(&inst.n)?);
    let mut r = VerificationReport::new("block operator matrix corollary", "bs.block-corollary", inst.m.algebra());
    r.text("sign_convention", SIGN_CONVENTION)
        .real("two_tau2_xi", two_tau2);
    r.check("2 tau2[Xi(M)] = tau[Xi((W* M^-1 W)^-1)] + tau[Xi(U* M U)]", two_tau2, txi(&w_inv)? + txi(&u_m)?, BS_TOL)
        .check("2 tau2[Xi(M)] = tau[Xi((U* M^-1 U)^-1)] + tau[Xi(W* M W)]", two_tau2, txi(&u_inv)? + txi(&w_m)?, BS_TOL)
        .check("2 tau2[Xi(M)] = tau[Xi(N - K M^-1 K*)] + tau[Xi(M)]", two_tau2, txi(&cal_n)? + xm, BS_TOL)
        .check("2 tau2[Xi(M)] = tau[Xi(M - K* N^-1 K)] + tau[Xi(N)]", two_tau2, txi(&cal_m)? + xn, BS_TOL)
        .check("2 xi(M0, M) = xi(U* M U, (U* M^-1 U)^-1)", two_tau2 - xm - xn, txi(&u_inv)? - xm, BS_TOL)
        .check("2 xi(M0, M) = xi(W* M W, (W* M^-1 W)^-1)", two_tau2 - xm - xn, txi(&w_inv)? - xn, BS_TOL);
    let cal_m_inv = invert("M - K*N^{-1}K", &cal_m)?;
    let cal_n_inv = invert("N - KM^{-1}K*", &cal_n)?;
    r.check_residual(
        "U* M^-1 U = (M - K* N^-1 K)^-1",
        u_block.distance(&cal_m_inv) / cal_m_inv.norm().max(1.0),
        BS_TOL,
    )
    .check_residual(
        "W* M^-1 W = (N - K M^-1 K*)^-1",
        w_block.distance(&cal_n_inv) / cal_n_inv.norm().max(1.0),
        BS_TOL,
    );
    Ok(r)
}

/// Self-adjoint specialization: equality of τ-Fredholm indices of negative
/// spectral projections and, for `H0 ≻ 0`, `N = I`, the counting form.
pub fn sa_specialization(h0: &Operator, k: &Operator, n: &Operator) -> Result<VerificationReport> {
    h0.check_same_algebra(k)?;
    h0.check_same_algebra(n)?;
    for (name, x) in [("H0", h0), ("N", n)] {
        if !x.is_self_adjoint() {
            return Err(Error::Domain(format!("{name} is not self-adjoint")));
        }
    }
    let ks = k.adjoint();
    let n_inv = invert("N", n)?;
    let h0_inv = invert("H0", h0)?;
    let v = &(&ks * &n_inv) * k;
    let h = (h0 - &v).re_part();
    let b = (n - &(&(k * &h0_inv) * &ks)).re_part();
    invert("H", &h)?;
    invert("N - K H0^-1 K*", &b)?;

    let neg = |x: &Operator| negative_and_kernel_projections(x).map(|p| p.0);
    let lhs = tau_fredholm_index(&neg(h0)?, &neg(&h)?)?;
    let rhs = tau_fredholm_index(&neg(n)?, &neg(&b)?)?;
    let mut r = VerificationReport::new("self-adjoint Birman-Schwinger principle", "bs.self-adjoint", h0.algebra());
    r.text("sign_convention", SIGN_CONVENTION);
    r.check("index(E_H0(R-), E_H(R-)) = index(E_N(R-), E_{N - K H0^-1 K*}(R-))", lhs, rhs, COUNT_TOL);

    let h0_eig = h0.hermitian_eigen()?;
    let n_is_identity = n.distance(&Operator::identity(n.algebra())) <= 1e-12;
    if h0_eig.min_eigenvalue() > 0.0 && n_is_identity {
        let sqrt_v = v.re_part().psd_sqrt()?;
        let bs_op = (&(&sqrt_v * &h0_inv) * &sqrt_v).re_part();
        let neg_count = h.hermitian_eigen()?.weighted_count(|l| l < 0.0);
        let bs_count = bs_op.hermitian_eigen()?.weighted_count(|l| l > 1.0);
        r.check("Dim E_{H0 - V}(R-) = Dim E_{V^1/2 H0^-1 V^1/2}((1, inf))", neg_count, bs_count, COUNT_TOL);
    }
    Ok(r)
}

/// `V = -K* N^{-1} K` with `K = |V|^{1/2}` and `N = -sgn V` (`sgn 0 = 1`).
pub fn factor_perturbation(v: &Operator) -> Result<(Operator, Operator)> {
    let eig = v.hermitian_eigen()?;
    let k = eig.apply(|l| Complex64::new(l.abs().sqrt(), 0.0));
    let n = eig.apply(|l| Complex64::new(if l >= 0.0 { -1.0 } else { 1.0 }, 0.0));
    Ok((k, n))
}

/// `‖𝒩^{-1}(z) - [(N+z)^{-1} + (N+z)^{-1} K ℳ^{-1}(z) K* (N+z)^{-1}]‖`,
/// relative to `max(‖𝒩^{-1}(z)‖, 1)`.
pub fn resolvent_identity_residual(inst: &BSInstance, z: Complex64) -> Result<f64> {
    let (cal_m, cal_n) = schur_complements(inst, z)?;
    let nz_inv = invert("N + zI", &inst.n.shift(z))?;
    let lhs = invert("N(z)", &cal_n)?;
    let middle = &(&(&nz_inv * &inst.k) * &invert("M(z)", &cal_m)?) * &inst.k.adjoint();
    let rhs = &nz_inv + &(&middle * &nz_inv);
    Ok(lhs.distance(&rhs) / lhs.norm().max(1.0))
}

/// `|τ[log X] - log(iy)|` on the imaginary-cut branch.
fn log_deviation(x: &Operator, y: f64) -> Result<f64> {
    let reference = Complex64::new(y.ln(), FRAC_PI_2);
    Ok((tau_log(x, BranchConvention::ImCut)? - reference).norm())
}

/// Resolvent identity at `z` and the `𝒪(1/y)` behaviour of
/// `τ[log(N + iy)]` and `τ[log 𝒩(iy)]` against `log(iy)`.
pub fn resolvent_report(inst: &BSInstance, z: Complex64, ys: &[f64]) -> Result<VerificationReport> {
    if !(z.im > 0.0) {
        return Err(Error::Domain("resolvent identity is checked in the upper half-plane".into()));
    }
    let mut r = VerificationReport::new("Schur complement resolvent identity", "bs.resolvent", inst.m.algebra());
    r.check_residual("N(z)^-1 = (N+z)^-1 + (N+z)^-1 K M(z)^-1 K* (N+z)^-1", resolvent_identity_residual(inst, z)?, RESOLVENT_TOL)
        .complex("z", z);

    let n_norm = inst.n.norm();
    let k2 = inst.k.norm().powi(2);
    let mut dev_n = Vec::with_capacity(ys.len());
    let mut dev_cal = Vec::with_capacity(ys.len());
    for &y in ys {
        let iy = Complex64::new(0.0, y);
        let (_, cal_n) = schur_complements(inst, iy)?;
        let c_n = n_norm;
        let c_cal = n_norm + k2 / y;
        r.check_that(&format!("N(iy) invertible at y = {y}"), cal_n.is_invertible());
        let a = log_deviation(&inst.n.shift(iy), y)?;
        let b = log_deviation(&cal_n, y)?;
        // |τ log(I + X/(iy))| ≤ -log(1 - ‖X‖/y) ≤ 2‖X‖/y once y ≥ 2‖X‖.
        if y >= 2.0 * c_n {
            r.check_residual(&format!("y |tau log(N + iy) - log(iy)| at y = {y}"), y * a, 2.0 * c_n + f64::EPSILON);
        }
        if y >= 2.0 * c_cal {
            r.check_residual(&format!("y |tau log N(iy) - log(iy)| at y = {y}"), y * b, 2.0 * c_cal + f64::EPSILON);
        }
        dev_n.push(a);
        dev_cal.push(b);
    }
    for (name, dev) in [("N + iy", &dev_n), ("N(iy)", &dev_cal)] {
        for (w, yw) in dev.windows(2).zip(ys.windows(2)) {
            // Observed decay exponent between consecutive y.
            if w[0] > 1e-13 && w[1] > 1e-13 {
                let slope = (w[0] / w[1]).ln() / (yw[1] / yw[0]).ln();
                r.check_that(&format!("decay of {name} at least 1/y between y = {} and {}", yw[0], yw[1]), slope >= 0.95);
            }
        }
    }
    r.series("y", ys.to_vec())
        .series("deviation_n_shift", dev_n)
        .series("deviation_schur", dev_cal);
    Ok(r)
}
