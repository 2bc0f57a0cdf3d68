//! Finite multi-matrix *-algebras with a weighted tracial state.
//!
//! An algebra is a direct sum `M_{n_1} ⊕ ... ⊕ M_{n_k}` and its state is
//! `τ(X) = Σ w_i Tr(X_i)` with `Σ w_i n_i = 1`. A single block `(n, 1/n)` is
//! the normalized trace on `n x n` matrices; several blocks give
//! non-integer relative dimensions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, Matrix};
use crate::error::{Error, Result};

/// Self-adjointness residual accepted by `spectral` and friends.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;
/// Default tolerance of the dissipative gate `λ_min(Im X) ≥ -tol`.
pub const DISSIPATIVE_TOL: f64 = 1e-10;
/// Operators with a condition estimate above this are treated as singular.
pub const INVERTIBILITY_GATE: f64 = 1e12;
/// Relative eigenvalue clustering tolerance for spectral projections.
pub const CLUSTER_REL_TOL: f64 = 1e-8;

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// Block structure and trace weights of a finite *-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDescriptor {
    blocks: Vec<Block>,
    base: Option<Arc<AlgebraDescriptor>>,
}

impl AlgebraDescriptor {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structural("algebra needs at least one block".into()));
        }
        for b in &blocks {
            if b.dim == 0 {
                return Err(Error::Structural("block dimension must be positive".into()));
            }
            if !(b.weight.is_finite() && b.weight > 0.0) {
                return Err(Error::Structural(format!(
                    "block weight {} is not strictly positive",
                    b.weight
                )));
            }
        }
        let total: f64 = blocks.iter().map(|b| b.weight * b.dim as f64).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Structural(format!(
                "weights are not normalized: sum of weight*dim = {total}"
            )));
        }
        Ok(Self { blocks, base: None })
    }

    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(dim, weight)| Block { dim, weight })
                .collect(),
        )
    }

    /// The normalized trace on `n x n` matrices.
    pub fn factor(n: usize) -> Result<Self> {
        Self::from_pairs(&[(n, 1.0 / n as f64)])
    }

    /// Blocks of the given sizes, all with weight `1 / Σ n_i`.
    pub fn uniform(dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        let w = 1.0 / total as f64;
        Self::new(dims.iter().map(|&dim| Block { dim, weight: w }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// The descriptor this one was amplified from, if any.
    pub fn base(&self) -> Option<&Arc<AlgebraDescriptor>> {
        self.base.as_ref()
    }

    /// `A ⊗ M_2`: every block `(n, w)` becomes `(2n, w/2)`.
    pub fn amplify(&self) -> AlgebraDescriptor {
        AlgebraDescriptor {
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    dim: 2 * b.dim,
                    weight: b.weight / 2.0,
                })
                .collect(),
            base: Some(Arc::new(self.clone())),
        }
    }

    /// Weighted dimension `Σ w_i · count_i` for per-block counts.
    pub fn weighted_count(&self, counts: &[usize]) -> f64 {
        self.blocks
            .iter()
            .zip(counts)
            .map(|(b, &c)| b.weight * c as f64)
            .sum()
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{}x{}", b.dim, b.weight))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `"2x0.25,2x0.25"` (dimension x weight). A list of bare
/// dimensions such as `"2,3"` gets uniform weights.
impl FromStr for AlgebraDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        if parts.is_empty() {
            return Err(Error::Structural("empty block specification".into()));
        }
        let bad = |p: &str| Error::Structural(format!("bad block specification `{p}`"));
        if parts.iter().all(|p| !p.contains('x')) {
            let dims = parts
                .iter()
                .map(|p| p.parse::<usize>().map_err(|_| bad(p)))
                .collect::<Result<Vec<_>>>()?;
            return Self::uniform(&dims);
        }
        let mut blocks = Vec::with_capacity(parts.len());
        for p in parts {
            let (d, w) = p.split_once('x').ok_or_else(|| bad(p))?;
            blocks.push(Block {
                dim: d.trim().parse().map_err(|_| bad(p))?,
                weight: w.trim().parse().map_err(|_| bad(p))?,
            });
        }
        Self::new(blocks)
    }
}

fn same_algebra(a: &Arc<AlgebraDescriptor>, b: &Arc<AlgebraDescriptor>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A block-diagonal element of an algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    alg: Arc<AlgebraDescriptor>,
    blocks: Vec<Matrix>,
}

/// An inverse together with the 2-norm condition estimate of the input.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub inverse: Operator,
    pub condition: f64,
}

impl Operator {
    pub fn new(alg: Arc<AlgebraDescriptor>, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != alg.blocks.len() {
            return Err(Error::Structural(format!(
                "operator has {} blocks, algebra has {}",
                blocks.len(),
                alg.blocks.len()
            )));
        }
        for (i, (m, b)) in blocks.iter().zip(&alg.blocks).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::Structural(format!(
                    "block {i} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
            if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Structural(format!("block {i} has non-finite entries")));
            }
        }
        Ok(Self { alg, blocks })
    }

    fn from_parts(alg: Arc<AlgebraDescriptor>, blocks: Vec<Matrix>) -> Self {
        debug_assert_eq!(alg.blocks.len(), blocks.len());
        Self { alg, blocks }
    }

    pub fn from_fn<F>(alg: &Arc<AlgebraDescriptor>, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize) -> Complex64,
    {
        let blocks = alg
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| Matrix::from_fn(b.dim, b.dim, |i, j| f(k, i, j)))
            .collect();
        Self::from_parts(alg.clone(), blocks)
    }

    pub fn zeros(alg: &Arc<AlgebraDescriptor>) -> Self {
        Self::from_fn(alg, |_, _, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(alg: &Arc<AlgebraDescriptor>) -> Self {
        Self::scalar(alg, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(alg: &Arc<AlgebraDescriptor>, c: Complex64) -> Self {
        Self::from_fn(alg, |_, i, j| if i == j { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Diagonal operator; `diag` runs over all blocks in order.
    pub fn diagonal(alg: &Arc<AlgebraDescriptor>, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != alg.total_dim() {
            return Err(Error::Structural(format!(
                "diagonal has {} entries, algebra has total dimension {}",
                diag.len(),
                alg.total_dim()
            )));
        }
        let mut offsets = Vec::with_capacity(alg.blocks.len());
        let mut off = 0;
        for b in &alg.blocks {
            offsets.push(off);
            off += b.dim;
        }
        Ok(Self::from_fn(alg, |k, i, j| {
            if i == j {
                diag[offsets[k] + i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn real_diagonal(alg: &Arc<AlgebraDescriptor>, diag: &[f64]) -> Result<Self> {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(alg, &d)
    }

    pub fn algebra(&self) -> &Arc<AlgebraDescriptor> {
        &self.alg
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Matrix> {
        self.blocks
    }

    pub fn conforms_to(&self, alg: &Arc<AlgebraDescriptor>) -> bool {
        same_algebra(&self.alg, alg)
    }

    pub fn check_same_algebra(&self, other: &Operator) -> Result<()> {
        if same_algebra(&self.alg, &other.alg) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "operators live in different algebras ({} vs {})",
                self.alg, other.alg
            )))
        }
    }

    /// Applies `f` to every block.
    pub fn map_blocks<F>(&self, f: F) -> Operator
    where
        F: FnMut(&Matrix) -> Matrix,
    {
        Self::from_parts(self.alg.clone(), self.blocks.iter().map(f).collect())
    }

    pub fn try_map_blocks<F>(&self, f: F) -> Result<Operator>
    where
        F: FnMut(&Matrix) -> Result<Matrix>,
    {
        let blocks = self.blocks.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(self.alg.clone(), blocks))
    }

    fn zip_blocks<F>(&self, other: &Operator, mut f: F) -> Operator
    where
        F: FnMut(&Matrix, &Matrix) -> Matrix,
    {
        assert!(
            same_algebra(&self.alg, &other.alg),
            "operator algebra mismatch: {} vs {}",
            self.alg,
            other.alg
        );
        Self::from_parts(
            self.alg.clone(),
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    pub fn adjoint(&self) -> Operator {
        self.map_blocks(|m| m.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        self.map_blocks(|m| m * c)
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `X + c I`.
    pub fn shift(&self, c: Complex64) -> Operator {
        self.map_blocks(|m| {
            let mut out = m.clone();
            for i in 0..out.nrows() {
                out[(i, i)] += c;
            }
            out
        })
    }

    /// `Re X = (X + X*) / 2`.
    pub fn re_part(&self) -> Operator {
        self.map_blocks(dense::hermitian_part)
    }

    /// `Im X = (X - X*) / (2i)`.
    pub fn im_part(&self) -> Operator {
        self.map_blocks(dense::skew_imag_part)
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(dense::spectral_norm).fold(0.0, f64::max)
    }

    /// Frobenius norm of the block-diagonal matrix (unweighted).
    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        (self - other).norm()
    }

    /// `‖X - X*‖ / max(1, ‖X‖)` in Frobenius norm.
    pub fn hermitian_residual(&self) -> f64 {
        let diff: f64 = self
            .blocks
            .iter()
            .map(|m| (m - m.adjoint()).norm_squared())
            .sum::<f64>()
            .sqrt();
        diff / self.frobenius_norm().max(1.0)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.hermitian_residual() <= SELF_ADJOINT_TOL
    }

    /// `‖X* X - I‖`.
    pub fn unitarity_residual(&self) -> f64 {
        let id = Operator::identity(&self.alg);
        (&(&self.adjoint() * self) - &id).norm()
    }

    /// `max(‖P² - P‖, ‖P - P*‖)`.
    pub fn projection_residual(&self) -> f64 {
        let sq = self * self;
        (&sq - self).norm().max((self - &self.adjoint()).norm())
    }

    pub fn condition_number(&self) -> f64 {
        let mut smax: f64 = 0.0;
        let mut smin = f64::INFINITY;
        for m in &self.blocks {
            for s in dense::singular_values(m) {
                smax = smax.max(s);
                smin = smin.min(s);
            }
        }
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.condition_number() <= INVERTIBILITY_GATE
    }

    /// Inverse with condition estimate; errors past the invertibility gate.
    pub fn inverse(&self) -> Result<Inverse> {
        let condition = self.condition_number();
        if !(condition <= INVERTIBILITY_GATE) {
            return Err(Error::Domain(format!(
                "operator is singular (condition estimate {condition:e})"
            )));
        }
        let inverse = self.try_map_blocks(|m| {
            dense::inverse(m).ok_or_else(|| Error::Domain("LU factorization failed".into()))
        })?;
        Ok(Inverse { inverse, condition })
    }

    pub fn inv(&self) -> Result<Operator> {
        self.inverse().map(|i| i.inverse)
    }

    /// The tracial state `τ(X) = Σ w_i Tr(X_i)`.
    pub fn tau(&self) -> Complex64 {
        self.alg
            .blocks
            .iter()
            .zip(&self.blocks)
            .map(|(b, m)| dense::trace(m) * b.weight)
            .sum()
    }

    /// Per-block Hermitian eigen-decomposition (ascending).
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if !self.is_self_adjoint() {
            return Err(Error::Domain(format!(
                "operator is not self-adjoint (residual {:e})",
                self.hermitian_residual()
            )));
        }
        Ok(self.hermitian_eigen_unchecked())
    }

    pub(crate) fn hermitian_eigen_unchecked(&self) -> HermitianEigen {
        let (values, vectors) = self.blocks.iter().map(dense::hermitian_eigen).unzip();
        HermitianEigen {
            alg: self.alg.clone(),
            values,
            vectors,
        }
    }

    /// Real-valued functional calculus `f(X)` for self-adjoint `X`.
    pub fn apply_hermitian<F>(&self, f: F) -> Result<Operator>
    where
        F: Fn(f64) -> f64,
    {
        Ok(self.hermitian_eigen()?.apply(|x| Complex64::new(f(x), 0.0)))
    }

    /// Square root of a positive semidefinite operator; tiny negative
    /// eigenvalues from rounding are clamped to zero.
    pub fn psd_sqrt(&self) -> Result<Operator> {
        self.psd_sqrt_at_scale(self.norm())
    }

    /// As [`Operator::psd_sqrt`], with rounding judged against `scale`
    /// rather than `‖X‖`. Useful when `X` is a nearly vanishing part of a
    /// larger operator.
    pub fn psd_sqrt_at_scale(&self, scale: f64) -> Result<Operator> {
        let eig = self.hermitian_eigen()?;
        let scale = scale.max(self.norm()).max(f64::MIN_POSITIVE);
        let lowest = eig.min_eigenvalue();
        if lowest < -1e-10 * scale {
            return Err(Error::Domain(format!(
                "operator is not positive semidefinite (λ_min = {lowest:e})"
            )));
        }
        Ok(eig.apply(|x| Complex64::new(x.max(0.0).sqrt(), 0.0)))
    }

    /// `|X|` for self-adjoint `X`.
    pub fn abs(&self) -> Result<Operator> {
        self.apply_hermitian(f64::abs)
    }

    /// Complex eigenvalues (all blocks concatenated, Schur order).
    pub fn eigenvalues(&self) -> Result<Vec<Vec<Complex64>>> {
        self.blocks
            .iter()
            .map(|m| {
                if let Some((a, b)) = dense::split_imag_shift(m) {
                    let (vals, _) = dense::hermitian_eigen(&a);
                    Ok(vals.into_iter().map(|x| Complex64::new(x, b)).collect())
                } else {
                    Ok(dense::ComplexSchur::new(m)?.eigenvalues())
                }
            })
            .collect()
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

/// Per-block eigen-decomposition of a self-adjoint operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    alg: Arc<AlgebraDescriptor>,
    pub values: Vec<Vec<f64>>,
    pub vectors: Vec<Matrix>,
}

impl HermitianEigen {
    pub fn apply<F>(&self, f: F) -> Operator
    where
        F: Fn(f64) -> Complex64,
    {
        let blocks = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(v, q)| dense::hermitian_function(v, q, &f))
            .collect();
        Operator::from_parts(self.alg.clone(), blocks)
    }

    /// Weighted count `Σ w_i #{λ ∈ block i : pred(λ)}`.
    pub fn weighted_count<P>(&self, pred: P) -> f64
    where
        P: Fn(f64) -> bool,
    {
        let counts: Vec<usize> = self
            .values
            .iter()
            .map(|v| v.iter().filter(|&&x| pred(x)).count())
            .collect();
        self.alg.weighted_count(&counts)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    /// Spectral projection onto eigenvalues satisfying `pred`.
    pub fn projection<P>(&self, pred: P) -> Operator
    where
        P: Fn(f64) -> bool,
    {
        self.apply(|x| Complex64::new(if pred(x) { 1.0 } else { 0.0 }, 0.0))
    }
}

/// Clustered spectral resolution `X = Σ λ_k P_k` of a self-adjoint operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projections: Vec<Operator>,
    pub cluster_tolerance: f64,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self, alg: &Arc<AlgebraDescriptor>) -> Operator {
        let mut acc = Operator::zeros(alg);
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            acc = &acc + &p.scale_real(*l);
        }
        acc
    }
}

/// Spectral decomposition with eigenvalues closer than `cluster_tol` merged
/// (default `1e-8 ‖X‖`).
pub fn spectral(x: &Operator, cluster_tol: Option<f64>) -> Result<SpectralDecomposition> {
    let eig = x.hermitian_eigen()?;
    let tol = cluster_tol.unwrap_or(CLUSTER_REL_TOL * eig.max_abs_eigenvalue());
    let mut all: Vec<(f64, usize, usize)> = eig
        .values
        .iter()
        .enumerate()
        .flat_map(|(b, v)| v.iter().enumerate().map(move |(i, &l)| (l, b, i)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for item in all {
        match clusters.last_mut() {
            Some(c) if item.0 - c.last().unwrap().0 <= tol => c.push(item),
            _ => clusters.push(vec![item]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projections = Vec::with_capacity(clusters.len());
    for c in clusters {
        eigenvalues.push(c.iter().map(|e| e.0).sum::<f64>() / c.len() as f64);
        let blocks = x
            .alg
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let mut p = Matrix::zeros(blk.dim, blk.dim);
                for &(_, bb, i) in &c {
                    if bb == b {
                        let v = eig.vectors[b].column(i);
                        p += v * v.adjoint();
                    }
                }
                p
            })
            .collect();
        projections.push(Operator::from_parts(x.alg.clone(), blocks));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        cluster_tolerance: tol,
    })
}

/// `τ(X)` after checking that `X` conforms to `alg`.
pub fn trace(alg: &Arc<AlgebraDescriptor>, x: &Operator) -> Result<Complex64> {
    if !x.conforms_to(alg) {
        return Err(Error::Structural(format!(
            "operator over {} does not conform to {}",
            x.alg, alg
        )));
    }
    Ok(x.tau())
}

/// `τ⁽²⁾` on an amplified algebra, evaluated as `(τ(A) + τ(D)) / 2` on the
/// diagonal corners.
pub fn tau2(alg2: &Arc<AlgebraDescriptor>, x: &Operator) -> Result<Complex64> {
    let base = alg2
        .base()
        .ok_or_else(|| Error::Structural(format!("{alg2} is not an amplified algebra")))?
        .clone();
    if !x.conforms_to(alg2) {
        return Err(Error::Structural("operator does not conform to the amplified algebra".into()));
    }
    let a = Isometry::First.compress(x)?;
    let d = Isometry::Second.compress(x)?;
    debug_assert!(a.conforms_to(&base));
    Ok((a.tau() + d.tau()) * 0.5)
}

/// `A ↦ A ⊗ M_2` as a free function.
pub fn amplify(alg: &AlgebraDescriptor) -> AlgebraDescriptor {
    alg.amplify()
}

/// The 2x2 operator matrix `(M K*; K N)` in the amplified algebra.
pub fn block2(m: &Operator, k: &Operator, n: &Operator) -> Result<Operator> {
    m.check_same_algebra(k)?;
    m.check_same_algebra(n)?;
    let alg2 = Arc::new(m.alg.amplify());
    let blocks = m
        .blocks
        .iter()
        .zip(&k.blocks)
        .zip(&n.blocks)
        .map(|((mb, kb), nb)| {
            let d = mb.nrows();
            let mut out = Matrix::zeros(2 * d, 2 * d);
            out.view_mut((0, 0), (d, d)).copy_from(mb);
            out.view_mut((0, d), (d, d)).copy_from(&kb.adjoint());
            out.view_mut((d, 0), (d, d)).copy_from(kb);
            out.view_mut((d, d), (d, d)).copy_from(nb);
            out
        })
        .collect();
    Ok(Operator::from_parts(alg2, blocks))
}

/// The isometries `U = (I; 0)` and `W = (0; I)` of `H` into `H ⊕ H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Isometry {
    First,
    Second,
}

impl Isometry {
    /// `V* X V` for an operator `X` on the amplified algebra.
    pub fn compress(self, x: &Operator) -> Result<Operator> {
        let base = x
            .alg
            .base()
            .ok_or_else(|| Error::Structural("compression needs an amplified operator".into()))?
            .clone();
        let blocks = x
            .blocks
            .iter()
            .map(|m| {
                let d = m.nrows() / 2;
                let o = match self {
                    Isometry::First => 0,
                    Isometry::Second => d,
                };
                m.view((o, o), (d, d)).into_owned()
            })
            .collect();
        Ok(Operator::from_parts(base, blocks))
    }
}

/// `max(0, -λ_min(Im X))`; zero for dissipative operators.
pub fn dissipativity_defect(x: &Operator) -> f64 {
    let lowest = x.im_part().hermitian_eigen_unchecked().min_eigenvalue();
    (-lowest).max(0.0)
}

pub fn is_dissipative(x: &Operator) -> bool {
    dissipativity_defect(x) <= DISSIPATIVE_TOL * x.norm().max(1.0)
}
