use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the operator toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Block structure or shape mismatch between operators and descriptors.
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation's mathematical precondition does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// An eigenvalue lies on (or too close to) the branch cut of the requested logarithm.
    #[error("eigenvalue {eigenvalue} lies within the cut-proximity threshold of the branch cut")]
    Branch { eigenvalue: Complex64 },

    /// A numerical routine failed (eigensolver, quadrature budget, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An epsilon-regularized sequence did not settle below its stall tolerance.
    #[error("{what}: extrapolation stalled (last difference {last_difference:e} > {tolerance:e})")]
    Stalled {
        what: String,
        last_difference: f64,
        tolerance: f64,
        history: Vec<f64>,
    },

    /// A path of operators hits a (numerically) singular point.
    #[error("path is singular at t = {t} (condition estimate {condition:e})")]
    SingularPath { t: f64, condition: f64 },

    /// A boundary value K (H0 + i0)^{-1} K* does not exist.
    #[error("boundary value does not exist: kernel obstruction {obstruction:e}")]
    NoBoundaryValue { obstruction: f64, history: Vec<f64> },

    /// A named hypothesis of a verification routine failed.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
