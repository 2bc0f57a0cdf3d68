//! Dense kernels on single complex matrices. Everything in here works on one
//! block at a time; the block-diagonal bookkeeping lives in `algebra`.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 20_000;

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// 2-norm condition number; `f64::INFINITY` for exactly singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn skew_imag_part(m: &Matrix) -> Matrix {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `V diag(f(λ)) V*` for a Hermitian eigen-decomposition.
pub fn hermitian_function<F>(values: &[f64], vectors: &Matrix, f: F) -> Matrix
where
    F: Fn(f64) -> Complex64,
{
    let n = values.len();
    let mut scaled = vectors.clone();
    for (c, &lambda) in values.iter().enumerate() {
        let fl = f(lambda);
        for r in 0..n {
            scaled[(r, c)] *= fl;
        }
    }
    scaled * vectors.adjoint()
}

/// `(A, b)` when `m = A + ibI` with `A` Hermitian, to working precision.
pub fn split_imag_shift(m: &Matrix) -> Option<(Matrix, f64)> {
    let n = m.nrows();
    if n == 0 {
        return None;
    }
    let b = (0..n).map(|i| m[(i, i)].im).sum::<f64>() / n as f64;
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= Complex64::new(0.0, b);
    }
    if (&a - a.adjoint()).norm() <= 1e-14 * m.norm().max(1.0) {
        Some((hermitian_part(&a), b))
    } else {
        None
    }
}

/// Complex Schur form `m = Q T Q*`.
pub struct ComplexSchur {
    pub q: Matrix,
    pub t: Matrix,
}

/// Complex Schur form by Hessenberg reduction and single-shift QR.
///
/// Fallback for inputs on which the double-shift iteration stalls. Deflation
/// is judged against both the neighbouring diagonal and `‖m‖`, so clusters
/// of tiny eigenvalues do not stop it.
fn single_shift_qr(m: &Matrix) -> Option<(Matrix, Matrix)> {
    let n = m.nrows();
    let (mut z, mut h) = m.clone().hessenberg().unpack();
    let zero = Complex64::new(0.0, 0.0);
    let floor = f64::EPSILON * m.norm().max(f64::MIN_POSITIVE);
    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            if sub <= f64::EPSILON * (h[(l - 1, l - 1)].norm() + h[(l, l)].norm()) || sub <= floor {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return None;
        }
        let mu = if iter % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let (m1, m2) = ((a + d) * 0.5 + disc, (a + d) * 0.5 - disc);
            if (m1 - d).norm() < (m2 - d).norm() { m1 } else { m2 }
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let r = x.norm().hypot(y.norm());
            if r == 0.0 {
                continue;
            }
            let (c, s) = if x.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0))
            } else {
                (x.norm() / r, x / x.norm() * y.conj() / r)
            };
            for j in (if k > l { k - 1 } else { l })..n {
                let (u, v) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = u * c + s * v;
                h[(k + 1, j)] = v * c - s.conj() * u;
            }
            for i in 0..=(k + 2).min(hi) {
                let (u, v) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = u * c + v * s.conj();
                h[(i, k + 1)] = v * c - u * s;
            }
            for i in 0..n {
                let (u, v) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = u * c + v * s.conj();
                z[(i, k + 1)] = v * c - u * s;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
        }
    }
    Some((z, h))
}

impl ComplexSchur {
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Ok(Self {
                q: Matrix::zeros(0, 0),
                t: Matrix::zeros(0, 0),
            });
        }
        let (q, mut t) = match Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER) {
            Some(s) => s.unpack(),
            None => single_shift_qr(m)
                .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?,
        };
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { q, t })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Whether the triangular factor is diagonal to working precision, in
    /// which case `Q` already holds an orthonormal eigenbasis.
    pub fn is_normal(&self) -> bool {
        let n = self.t.nrows();
        let scale = self.t.norm().max(f64::MIN_POSITIVE);
        let mut off = 0.0;
        for j in 0..n {
            for i in 0..j {
                off += self.t[(i, j)].norm_sqr();
            }
        }
        off.sqrt() <= 1e-13 * scale
    }

    /// Unit-norm eigenvectors as columns, by back substitution on `T`.
    pub fn eigenvectors(&self) -> Matrix {
        let n = self.t.nrows();
        if self.is_normal() {
            return self.q.clone();
        }
        let t = &self.t;
        let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
        let mut y = Matrix::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in i + 1..=k {
                    acc += t[(i, j)] * y[(j, k)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < smin {
                    denom = Complex64::new(smin, 0.0);
                }
                y[(i, k)] = -acc / denom;
            }
        }
        let mut v = &self.q * y;
        for mut col in v.column_iter_mut() {
            let nrm = col.norm();
            if nrm > 0.0 {
                col /= Complex64::new(nrm, 0.0);
            }
        }
        v
    }
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    if m.is_empty() {
        return Some(Matrix::zeros(0, 0));
    }
    m.clone().try_inverse()
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn trace(m: &Matrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}
