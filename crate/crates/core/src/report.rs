//! Structured records of identity checks.
//!
//! A report holds one or more [`Check`] lines. Its top-level `lhs`, `rhs`,
//! `residual` and `tolerance` mirror the line that is closest to failing
//! (largest `residual / tolerance`), so `pass ⇔ residual ≤ tolerance` holds
//! for the report as a whole.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraDescriptor;

/// A real or complex side of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn as_complex(self) -> Complex64 {
        match self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex(z) => z,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<Complex64> for Value {
    fn from(z: Complex64) -> Self {
        Value::Complex(z)
    }
}

/// Auxiliary data attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Real(f64),
    Complex(Complex64),
    Series(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lhs: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rhs: Option<Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Where the operators came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<u64>,
    pub descriptor: String,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub anchor: String,
    pub inputs: Inputs,
    pub lhs: Option<Value>,
    pub rhs: Option<Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<f64>,
    pub warnings: Vec<String>,
    pub details: Vec<Check>,
    pub quantities: BTreeMap<String, Quantity>,
}

impl VerificationReport {
    pub fn new(identity: &str, anchor: &str, alg: &Arc<AlgebraDescriptor>) -> Self {
        Self {
            identity: identity.to_string(),
            anchor: anchor.to_string(),
            inputs: Inputs {
                seed: None,
                trial: None,
                descriptor: alg.to_string(),
                dims: alg.dims(),
            },
            lhs: None,
            rhs: None,
            residual: 0.0,
            tolerance: 0.0,
            pass: false,
            elapsed_ms: None,
            warnings: Vec::new(),
            details: Vec::new(),
            quantities: BTreeMap::new(),
        }
    }

    /// Adds the line `|lhs - rhs| ≤ tol`.
    pub fn check(&mut self, name: &str, lhs: impl Into<Value>, rhs: impl Into<Value>, tol: f64) -> &mut Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let residual = (lhs.as_complex() - rhs.as_complex()).norm();
        self.push(name, Some(lhs), Some(rhs), residual, tol)
    }

    /// Adds a line whose residual is computed elsewhere (a norm, a defect).
    pub fn check_residual(&mut self, name: &str, residual: f64, tol: f64) -> &mut Self {
        self.push(name, None, None, residual, tol)
    }

    /// Adds a boolean line; failure is recorded with an infinite residual.
    pub fn check_that(&mut self, name: &str, holds: bool) -> &mut Self {
        self.push(name, None, None, if holds { 0.0 } else { f64::INFINITY }, 0.0)
    }

    fn push(&mut self, name: &str, lhs: Option<Value>, rhs: Option<Value>, residual: f64, tolerance: f64) -> &mut Self {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual.abs() };
        self.details.push(Check {
            name: name.to_string(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
        self.refresh();
        self
    }

    pub fn quantity(&mut self, key: &str, q: Quantity) -> &mut Self {
        self.quantities.insert(key.to_string(), q);
        self
    }

    pub fn real(&mut self, key: &str, x: f64) -> &mut Self {
        self.quantity(key, Quantity::Real(x))
    }

    pub fn complex(&mut self, key: &str, z: Complex64) -> &mut Self {
        self.quantity(key, Quantity::Complex(z))
    }

    pub fn series(&mut self, key: &str, xs: Vec<f64>) -> &mut Self {
        self.quantity(key, Quantity::Series(xs))
    }

    pub fn text(&mut self, key: &str, s: &str) -> &mut Self {
        self.quantity(key, Quantity::Text(s.to_string()))
    }

    pub fn warn(&mut self, w: impl Into<String>) -> &mut Self {
        self.warnings.push(w.into());
        self
    }

    pub fn warn_all<I: IntoIterator<Item = String>>(&mut self, ws: I) -> &mut Self {
        self.warnings.extend(ws);
        self
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.details.iter().find(|c| c.name == name)
    }

    /// Largest residual over all lines.
    pub fn max_residual(&self) -> f64 {
        self.details.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    fn refresh(&mut self) {
        let ratio = |c: &Check| {
            if c.residual == 0.0 {
                0.0
            } else if c.tolerance == 0.0 {
                f64::INFINITY
            } else {
                c.residual / c.tolerance
            }
        };
        let worst = self
            .details
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| ratio(a).total_cmp(&ratio(b)).then(j.cmp(i)))
            .map(|(_, c)| c.clone());
        if let Some(w) = worst {
            self.lhs = w.lhs;
            self.rhs = w.rhs;
            self.residual = w.residual;
            self.tolerance = w.tolerance;
            self.pass = self.details.iter().all(|c| c.pass);
        }
    }

    /// Replaces the tolerance of every numeric line by `tol` and re-grades.
    /// Boolean lines keep their verdict.
    pub fn retolerance(&mut self, tol: f64) -> &mut Self {
        for c in &mut self.details {
            if c.residual.is_finite() || c.tolerance > 0.0 {
                c.tolerance = tol;
                c.pass = c.residual <= tol;
            }
        }
        self.refresh();
        self
    }

    /// A failed report for a computation that returned an error.
    pub fn failed(identity: &str, anchor: &str, alg: &Arc<AlgebraDescriptor>, error: impl fmt::Display) -> Self {
        let mut r = Self::new(identity, anchor, alg);
        r.check_that("computation completed", false).warn(error.to_string());
        r
    }

    /// Same report with the timing field cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_ms: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg() -> Arc<AlgebraDescriptor> {
        Arc::new(AlgebraDescriptor::factor(2).unwrap())
    }

    #[test]
    fn retolerance_regrades_numeric_lines() {
        let mut r = VerificationReport::new("x", "y", &alg());
        r.check("a", 1.0, 1.0 + 1e-6, 1e-8).check_that("b", true);
        assert!(!r.pass);
        r.retolerance(1e-5);
        assert!(r.pass);
        assert_eq!(r.tolerance, 1e-5);
        let f = VerificationReport::failed("x", "y", &alg(), "boom");
        assert!(!f.pass && f.warnings == ["boom"]);
    }

    #[test]
    fn empty_report_does_not_pass() {
        let r = VerificationReport::new("x", "x", &alg());
        assert!(!r.pass);
    }

    #[test]
    fn worst_line_drives_the_summary() {
        let mut r = VerificationReport::new("id", "anchor", &alg());
        r.check("a", 1.0, 1.0 + 1e-12, 1e-10);
        r.check("b", 2.0, 2.0 + 1e-9, 1e-8);
        assert!(r.pass);
        assert_eq!(r.lhs, Some(Value::Real(2.0)));
        assert!(r.residual <= r.tolerance);
        r.check_residual("c", 1e-3, 1e-6);
        assert!(!r.pass);
        assert_eq!(r.residual, 1e-3);
        assert_eq!(r.inputs.dims, vec![2]);
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = VerificationReport::new("id", "anchor", &alg());
        r.check("nan", f64::NAN, 0.0, 1.0);
        assert!(!r.pass);
        assert!(r.residual.is_infinite());
    }

    #[test]
    fn boolean_lines() {
        let mut r = VerificationReport::new("id", "anchor", &alg());
        r.check_that("ok", true);
        assert!(r.pass);
        r.check_that("bad", false);
        assert!(!r.pass);
    }
}
