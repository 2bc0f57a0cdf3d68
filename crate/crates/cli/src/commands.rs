//! One verification per trial for each command.

use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use relindex_core::algebra::is_dissipative;
use relindex_core::bschwinger::{bs_limit, verify_bs, BSInstance};
use relindex_core::dets::{det_tau_dissipative, dissipative_path, dlhs_det_path, polar_identity_check};
use relindex_core::ensemble::{generate, ginibre, random_descriptor, trial_rng};
use relindex_core::quad::QuadPolicy;
use relindex_core::report::Quantity;
use relindex_core::scattering::{birman_krein, birman_krein_synthetic, BKInstance};
use relindex_core::xi::{ssf_curve, tau_xi, xi_operator};
use relindex_core::{AlgebraDescriptor, Ensemble, Operator, Result, VerificationReport, XiOptions, XiStrategy};

use crate::config::{BkMode, Command, ExperimentConfig};

/// Agreement required between Ξ strategies when one of them is an ε-limit.
pub const EPS_STRATEGY_TOL: f64 = 1e-6;
/// Agreement required between the exact Ξ strategies.
pub const EXACT_STRATEGY_TOL: f64 = 1e-9;
/// Homotopy tolerance for the path determinant against its closed form.
pub const PATH_DET_TOL: f64 = 2e-6;
/// Grid points of the spectral shift function.
pub const SSF_POINTS: usize = 41;
/// Shift used for the translation check of the spectral shift function.
const SSF_SHIFT: f64 = 0.37;

fn identity_name(command: Command) -> (&'static str, &'static str) {
    match command {
        Command::Xi => ("Xi strategy agreement", "xi.strategies"),
        Command::Det => ("polar determinant identity", "dets.polar"),
        Command::BsVerify => ("Birman-Schwinger identity", "bs.schur-complement-invariance"),
        Command::BsLimit => ("regularized Birman-Schwinger identity", "bs.limit"),
        Command::BkVerify => ("Birman-Krein formula", "scattering.birman-krein"),
        Command::Ssf => ("spectral shift function", "xi.ssf"),
        Command::Sweep => ("sweep", "sweep"),
    }
}

pub fn descriptor(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Arc<AlgebraDescriptor>> {
    match &cfg.blocks {
        Some(d) => Ok(d.clone()),
        None => random_descriptor(cfg.family, cfg.min_dim, cfg.max_dim, rng),
    }
}

/// Runs `command` for trial `trial`; errors become failed reports.
pub fn run_trial(cfg: &ExperimentConfig, command: Command, trial: u64) -> VerificationReport {
    let started = std::time::Instant::now();
    let mut rng = trial_rng(cfg.seed, trial);
    let (name, anchor) = identity_name(command);
    let mut report = match descriptor(cfg, &mut rng) {
        Ok(alg) => match dispatch(cfg, command, &alg, &mut rng) {
            Ok(r) => r,
            Err(e) => VerificationReport::failed(name, anchor, &alg, e),
        },
        Err(e) => {
            let alg = Arc::new(AlgebraDescriptor::factor(1).expect("1x1 descriptor"));
            VerificationReport::failed(name, anchor, &alg, e)
        }
    };
    if let Some(tol) = cfg.tolerance_for(command) {
        report.retolerance(tol);
    }
    report.inputs.seed = Some(cfg.seed);
    report.inputs.trial = Some(trial);
    report.elapsed_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    report
}

fn dispatch(
    cfg: &ExperimentConfig,
    command: Command,
    alg: &Arc<AlgebraDescriptor>,
    rng: &mut ChaCha8Rng,
) -> Result<VerificationReport> {
    let ensemble = cfg.ensemble_for(command);
    let mut draw = |e: Ensemble| generate(e, alg, &mut *rng);
    match command {
        Command::Xi => compare_strategies(&draw(ensemble), &XiOptions { strategy: None, schedule: cfg.schedule.clone() }),
        Command::Det => determinant(&draw(ensemble)),
        Command::BsVerify | Command::BsLimit => {
            let m = draw(ensemble);
            let n = draw(ensemble);
            let inst = BSInstance::new(m, n, ginibre(alg, rng))?;
            if command == Command::BsVerify {
                verify_bs(&inst)
            } else {
                bs_limit(&inst, &cfg.schedule, cfg.limit_mode)
            }
        }
        Command::BkVerify => match cfg.bk_mode {
            BkMode::Matrix => {
                let h0 = draw(ensemble);
                let n = draw(ensemble);
                birman_krein(&BKInstance::new(h0, ginibre(alg, rng), n)?, &cfg.schedule)
            }
            BkMode::Synthetic => {
                let n = draw(ensemble);
                let re = draw(Ensemble::HermitianGaussian);
                let im = draw(Ensemble::PositiveDefinite);
                birman_krein_synthetic(&n, &(&re + &im.scale(Complex64::new(0.0, 1.0))))
            }
        },
        Command::Ssf => {
            let h0 = draw(ensemble);
            let h = &h0 + &draw(Ensemble::HermitianGaussian);
            spectral_shift(&h, &h0)
        }
        Command::Sweep => unreachable!("sweep is expanded by the runner"),
    }
}

/// Every applicable Ξ strategy on `m`, compared pairwise in operator norm.
pub fn compare_strategies(m: &Operator, opts: &XiOptions) -> Result<VerificationReport> {
    let mut strategies = Vec::new();
    if m.is_self_adjoint() {
        strategies.push(XiStrategy::SelfAdjointSpectral);
    }
    if m.is_invertible() {
        strategies.push(XiStrategy::InvertibleLog);
    }
    strategies.push(XiStrategy::EpsLimit);
    let (name, anchor) = identity_name(Command::Xi);
    let mut r = VerificationReport::new(name, anchor, m.algebra());
    let mut results = Vec::new();
    for &s in &strategies {
        let o = XiOptions { strategy: Some(s), schedule: opts.schedule.clone() };
        let x = xi_operator(m, &o)?;
        let t = tau_xi(m, &o)?;
        r.real(&format!("tau_xi_{s:?}"), t.value).warn_all(t.warnings);
        results.push((s, x, t.value));
    }
    if results.len() == 1 {
        r.check_that("a second strategy applies", false);
    }
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (a, xa, ta) = &results[i];
            let (b, xb, tb) = &results[j];
            let tol = if [*a, *b].contains(&XiStrategy::EpsLimit) {
                EPS_STRATEGY_TOL
            } else {
                EXACT_STRATEGY_TOL
            };
            r.check_residual(&format!("||Xi_{a:?} - Xi_{b:?}||"), xa.distance(xb), tol)
                .check(&format!("tau[Xi_{a:?}] = tau[Xi_{b:?}]"), *ta, *tb, tol);
        }
    }
    Ok(r)
}

/// The polar identity together with the path determinant along an in-class path.
pub fn determinant(m: &Operator) -> Result<VerificationReport> {
    let mut r = polar_identity_check(m)?;
    let path = dissipative_path(m)?;
    let d = dlhs_det_path(&path.path, &QuadPolicy::default())?;
    let closed = det_tau_dissipative(m)?;
    r.check(
        "path determinant = exp(tau[log M])",
        d.value,
        closed,
        PATH_DET_TOL * closed.norm().max(1.0),
    )
    .complex("det_path", d.value)
    .real("winding", d.winding());
    if path.two_leg {
        r.text("path", "two-leg");
    }
    Ok(r)
}

/// `λ ↦ ξ(H - λ, H0 - λ)` on a grid covering both spectra.
pub fn spectral_shift(h: &Operator, h0: &Operator) -> Result<VerificationReport> {
    let reach = h.norm().max(h0.norm()) + 1.0;
    let grid: Vec<f64> = (0..SSF_POINTS)
        .map(|k| -reach + 2.0 * reach * k as f64 / (SSF_POINTS - 1) as f64)
        .collect();
    let curve = ssf_curve(h, h0, &grid)?;
    let shift = Complex64::new(SSF_SHIFT, 0.0);
    let moved: Vec<f64> = grid.iter().map(|l| l + SSF_SHIFT).collect();
    let translated = ssf_curve(&h.shift(shift), &h0.shift(shift), &moved)?;
    let unit = Operator::identity(h.algebra()).tau().re;
    let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let (name, anchor) = identity_name(Command::Ssf);
    let mut r = VerificationReport::new(name, anchor, h.algebra());
    let overshoot = values.iter().map(|v| (v.abs() - unit).max(0.0)).fold(0.0, f64::max);
    let covariance = values
        .iter()
        .zip(&translated)
        .map(|(a, b)| (a - b.1).abs())
        .fold(0.0, f64::max);
    r.check_residual("|xi(H - l, H0 - l)| <= tau(I)", overshoot, 1e-12)
        .check("xi vanishes below both spectra", values[0], 0.0, 1e-12)
        .check("xi vanishes above both spectra", values[SSF_POINTS - 1], 0.0, 1e-12)
        .check_residual("translation covariance", covariance, 1e-12)
        .quantity("grid", Quantity::Series(grid))
        .quantity("ssf", Quantity::Series(values));
    Ok(r)
}

/// `xi` or `det` on a user-supplied operator.
pub fn on_input(cfg: &ExperimentConfig, command: Command, m: &Operator) -> anyhow::Result<VerificationReport> {
    if !is_dissipative(m) {
        anyhow::bail!("input operator is not dissipative");
    }
    let started = std::time::Instant::now();
    let mut r = match command {
        Command::Xi => compare_strategies(m, &XiOptions { strategy: None, schedule: cfg.schedule.clone() }),
        Command::Det => determinant(m),
        other => anyhow::bail!("{other} does not take an input operator"),
    }
    .unwrap_or_else(|e| {
        let (name, anchor) = identity_name(command);
        VerificationReport::failed(name, anchor, m.algebra(), e)
    });
    if let Some(tol) = cfg.tolerance_for(command) {
        r.retolerance(tol);
    }
    r.elapsed_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    Ok(r)
}
