//! Regularization schedules `ε_0 > ε_1 > ...` and the extrapolation of
//! `ε ↓ 0` boundary values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadValue;

/// Number of leading powers of ε removed by Richardson extrapolation.
pub const RICHARDSON_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extrapolation {
    /// Use the last iterate.
    None,
    /// Polynomial extrapolation to ε = 0 through the trailing iterates.
    Richardson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    values: Vec<f64>,
    pub extrapolation: Extrapolation,
    pub stall_tolerance: f64,
}

impl Default for EpsSchedule {
    /// `1e-2 · 2^{-k}`, `k = 0..=12`, Richardson, stall tolerance `1e-7`.
    fn default() -> Self {
        Self::geometric(1e-2, 0.5, 13).expect("default schedule is valid")
    }
}

impl EpsSchedule {
    pub fn new(values: Vec<f64>, extrapolation: Extrapolation, stall_tolerance: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Domain("epsilon schedule needs at least 3 entries".into()));
        }
        if values.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return Err(Error::Domain("epsilon schedule entries must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Domain("epsilon schedule must be strictly decreasing".into()));
        }
        if !(stall_tolerance > 0.0) {
            return Err(Error::Domain("stall tolerance must be positive".into()));
        }
        Ok(Self {
            values,
            extrapolation,
            stall_tolerance,
        })
    }

    /// `start · factor^k` for `k = 0..steps`.
    pub fn geometric(start: f64, factor: f64, steps: usize) -> Result<Self> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::Domain(format!("epsilon factor {factor} must lie in (0, 1)")));
        }
        let values = (0..steps).map(|k| start * factor.powi(k as i32)).collect();
        Self::new(values, Extrapolation::Richardson, 1e-7)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Every entry multiplied by `factor > 0`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|e| e * factor).collect(),
            self.extrapolation,
            self.stall_tolerance,
        )
    }

    pub fn with_extrapolation(mut self, extrapolation: Extrapolation) -> Self {
        self.extrapolation = extrapolation;
        self
    }

    pub fn with_stall_tolerance(mut self, tol: f64) -> Self {
        self.stall_tolerance = tol;
        self
    }

    /// Evaluates `f` along the schedule and extrapolates; the sequence must
    /// settle below the stall tolerance.
    pub fn limit<V, F>(&self, what: &str, mut f: F) -> Result<Limit<V>>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V>,
    {
        let samples = self
            .values
            .iter()
            .map(|&e| f(e))
            .collect::<Result<Vec<_>>>()?;
        let limit = self.extrapolate(&samples);
        let last = *limit.differences.last().unwrap_or(&f64::INFINITY);
        if !(last <= self.stall_tolerance) {
            return Err(Error::Stalled {
                what: what.to_string(),
                last_difference: last,
                tolerance: self.stall_tolerance,
                history: limit.differences,
            });
        }
        Ok(limit)
    }

    /// Extrapolated sequence without the stall check.
    pub fn extrapolate<V: QuadValue>(&self, samples: &[V]) -> Limit<V> {
        assert_eq!(samples.len(), self.values.len());
        let estimates: Vec<V> = match self.extrapolation {
            Extrapolation::None => samples.to_vec(),
            Extrapolation::Richardson => (RICHARDSON_ORDER..samples.len())
                .map(|k| {
                    let lo = k - RICHARDSON_ORDER;
                    polynomial_at_zero(&self.values[lo..=k], &samples[lo..=k])
                })
                .collect(),
        };
        let differences = estimates
            .windows(2)
            .map(|w| w[1].distance(&w[0]))
            .collect();
        Limit {
            value: estimates.last().expect("schedule is non-empty").clone(),
            differences,
            samples: samples.to_vec(),
        }
    }
}

/// Lagrange interpolant through `(eps[j], f[j])` evaluated at zero.
fn polynomial_at_zero<V: QuadValue>(eps: &[f64], f: &[V]) -> V {
    let mut acc: Option<V> = None;
    for (j, fj) in f.iter().enumerate() {
        let mut w = 1.0;
        for (m, &em) in eps.iter().enumerate() {
            if m != j {
                w *= em / (em - eps[j]);
            }
        }
        match acc.as_mut() {
            None => acc = Some(fj.scaled(w)),
            Some(a) => a.add_scaled(w, fj),
        }
    }
    acc.expect("at least one point")
}

/// Result of an `ε ↓ 0` extrapolation.
#[derive(Debug, Clone)]
pub struct Limit<V> {
    pub value: V,
    /// Successive distances between extrapolated estimates.
    pub differences: Vec<f64>,
    /// Raw values along the schedule.
    pub samples: Vec<V>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let s = EpsSchedule::default();
        assert_eq!(s.values().len(), 13);
        assert_eq!(s.values()[0], 1e-2);
        assert!((s.values()[12] - 1e-2 / 4096.0).abs() < 1e-20);
        assert_eq!(s.extrapolation, Extrapolation::Richardson);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsSchedule::new(vec![1.0, 0.5], Extrapolation::None, 1e-7).is_err());
        assert!(EpsSchedule::new(vec![1.0, 1.0, 0.5], Extrapolation::None, 1e-7).is_err());
        assert!(EpsSchedule::new(vec![1.0, 0.5, -0.1], Extrapolation::None, 1e-7).is_err());
        assert!(EpsSchedule::geometric(1.0, 1.5, 5).is_err());
    }

    #[test]
    fn richardson_removes_low_powers() {
        let s = EpsSchedule::default();
        let l = s.limit("quadratic", |e| Ok(3.0 + 2.0 * e - 5.0 * e * e)).unwrap();
        assert!((l.value - 3.0).abs() < 1e-13);
        let odd = s.limit("atan", |e: f64| Ok(0.5 - e.atan() / std::f64::consts::PI)).unwrap();
        assert!((odd.value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn divergent_sequences_stall() {
        let s = EpsSchedule::default();
        let r = s.limit("blowup", |e: f64| Ok(1.0 / e));
        match r {
            Err(Error::Stalled { history, .. }) => assert!(!history.is_empty()),
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn plain_last_iterate() {
        let s = EpsSchedule::default().with_extrapolation(Extrapolation::None);
        assert!(s.limit("linear", |e| Ok(1.0 + e)).is_err());
        let s = s.with_stall_tolerance(1e-5);
        let l = s.limit("linear", |e| Ok(1.0 + e)).unwrap();
        assert!((l.value - 1.0 - s.values()[12]).abs() < 1e-15);
    }
}
