//! Globally adaptive Gauss–Kronrod (7/15) quadrature over values that form a
//! normed vector space: scalars, matrices, block operators.
//!
//! The subdivision order is fully deterministic: the interval with the
//! largest error estimate is bisected (ties broken by position) and the
//! final sum runs left to right.

use num_complex::Complex64;

use crate::algebra::Operator;
use crate::dense::Matrix;
use crate::error::{Error, Result};

// Nodes and weights as tabulated, digits beyond f64 included.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated.
pub trait QuadValue: Clone {
    fn scaled(&self, w: f64) -> Self;
    fn add_scaled(&mut self, w: f64, other: &Self);
    /// Distance used for the error estimate.
    fn distance(&self, other: &Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Matrix {
    fn scaled(&self, w: f64) -> Self {
        self * Complex64::new(w, 0.0)
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += other * Complex64::new(w, 0.0);
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Operator {
    fn scaled(&self, w: f64) -> Self {
        self.scale_real(w)
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self = &*self + &other.scale_real(w);
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).frobenius_norm()
    }
    fn magnitude(&self) -> f64 {
        self.frobenius_norm()
    }
}

/// Stopping rule for `integrate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadPolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadPolicy {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Quadrature<V> {
    pub value: V,
    pub error_estimate: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

fn gk15<V, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut kronrod = fc.scaled(WGK[7]);
    let mut gauss = fc.scaled(WG[3]);
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        kronrod.add_scaled(WGK[j], &f1);
        kronrod.add_scaled(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], &f1);
            gauss.add_scaled(WG[j / 2], &f2);
        }
    }
    let value = kronrod.scaled(half);
    let error = value.distance(&gauss.scaled(half));
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, policy: &QuadPolicy) -> Result<Quadrature<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let mut segments = vec![gk15(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        let mut total = segments[0].value.clone();
        for s in &segments[1..] {
            total.add_scaled(1.0, &s.value);
        }
        let target = policy.abs_tol.max(policy.rel_tol * total.magnitude());
        if total_err <= target {
            segments.sort_by(|x, y| x.a.total_cmp(&y.a));
            let mut value = segments[0].value.clone();
            for s in &segments[1..] {
                value.add_scaled(1.0, &s.value);
            }
            return Ok(Quadrature {
                value,
                error_estimate: total_err,
                intervals: segments.len(),
                evaluations,
            });
        }
        if segments.len() >= policy.max_intervals {
            return Err(Error::Numeric(format!(
                "quadrature did not converge: error estimate {total_err:e} > {target:e} after {} intervals",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error).then(y.a.total_cmp(&x.a)))
            .map(|(i, _)| i)
            .unwrap();
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(Error::Numeric(format!(
                "quadrature interval [{}, {}] cannot be bisected further",
                s.a, s.b
            )));
        }
        segments.push(gk15(&mut f, s.a, mid)?);
        segments.push(gk15(&mut f, mid, s.b)?);
        evaluations += 30;
    }
}
