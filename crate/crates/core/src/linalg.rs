//! Dense complex linear algebra used throughout the crate.
//!
//! [`ComplexMatrix`] is a thin newtype over `nalgebra::DMatrix<Complex64>`;
//! eigen- and singular-value decompositions are delegated to nalgebra.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity / positivity tolerance used by every validator.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_GAP: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, row-major on the wire, finite entries only.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    /// Build from row-major entries, rejecting wrong lengths and NaN/Inf.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::BadShape {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Convenience constructor for literals in code and tests. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self(DMatrix::from_fn(n, m, |i, j| c(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(DMatrix::from_fn(d, d, |i, j| if i == j { c(diag[i], 0.0) } else { ZERO }))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Outer product |u><v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self(DMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj()))
    }

    /// Projector |v><v| onto a (not necessarily normalized) vector.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Square dimension, or [`Error::NotSquare`].
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows())
        } else {
            Err(Error::NotSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            })
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    /// Row-major copy of the entries.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    /// Max-abs entry, ‖m‖_max.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.ncols();
        (self.adjoint() * self).max_abs_diff(&Self::identity(d))
    }

    /// AB - BA.
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// <u|M|v>.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Hermitian part (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Mul<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * &rhs.0)
    }
}

impl Mul<ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs.0)
    }
}

/// Spectrum of a Hermitian operator with degenerate levels grouped.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Distinct eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal projector for each distinct eigenvalue; rank = multiplicity.
    pub eigenprojectors: Vec<ComplexMatrix>,
    /// Multiplicity of each distinct eigenvalue.
    pub multiplicities: Vec<usize>,
    /// Every eigenvalue with multiplicity, descending.
    pub raw_eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `raw_eigenvalues`.
    /// Inside a degenerate block this is whatever basis the eigensolver returned.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.eigenvectors.nrows();
        self.eigenvalues
            .iter()
            .zip(&self.eigenprojectors)
            .fold(ComplexMatrix::zeros(d, d), |acc, (&l, p)| acc + p.scale_real(l))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.raw_eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Raw eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = h.nrows();
    // Symmetrize so roundoff in the input does not leak into the solver.
    let sym = h.hermitian_part();
    let eig = sym.0.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, ComplexMatrix(vectors))
}

fn require_hermitian(h: &ComplexMatrix) -> Result<usize> {
    let d = h.dim()?;
    let deviation = h.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(d)
}

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues are reported in descending order; neighbours closer than
/// [`DEGENERACY_GAP`] share one projector.
pub fn spectral_decompose(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let d = require_hermitian(h)?;
    let (raw, vectors) = hermitian_eigen(h);

    let mut eigenvalues = Vec::new();
    let mut eigenprojectors = Vec::new();
    let mut multiplicities = Vec::new();
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && raw[end - 1] - raw[end] < DEGENERACY_GAP {
            end += 1;
        }
        let mut proj = ComplexMatrix::zeros(d, d);
        for k in start..end {
            proj = proj + ComplexMatrix::projector(&vectors.column(k));
        }
        let mean = raw[start..end].iter().sum::<f64>() / (end - start) as f64;
        eigenvalues.push(mean);
        eigenprojectors.push(proj);
        multiplicities.push(end - start);
        start = end;
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenprojectors,
        multiplicities,
        raw_eigenvalues: raw,
        eigenvectors: vectors,
    })
}

/// Eigenvalues (descending) and matching eigenvectors as columns. No validation.
pub(crate) fn hermitian_eigen_pair(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    hermitian_eigen(h)
}

/// Eigenvalues of a Hermitian matrix, descending. No validation.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(h).0
}

/// Eigenvectors of a Hermitian matrix as the columns of a unitary, by descending eigenvalue.
pub fn hermitian_eigenbasis(h: &ComplexMatrix) -> ComplexMatrix {
    hermitian_eigen(h).1
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.0.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Schatten 1-norm Tr√(MM†).
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Principal square root of a PSD operator.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything more negative is an error.
pub fn operator_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = require_hermitian(h)?;
    let (values, vectors) = hermitian_eigen(h);
    if let Some(&min) = values.last() {
        if min < -HERMITIAN_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    let roots: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(spectral_function(&vectors, &roots, d))
}

/// V diag(values) V†.
pub(crate) fn spectral_function(vectors: &ComplexMatrix, values: &[f64], d: usize) -> ComplexMatrix {
    let scaled = ComplexMatrix::from_fn(d, d, |i, j| vectors.get(i, j) * values[j]);
    scaled * vectors.adjoint()
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Which factor of a bipartite system to keep in [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Reduced operator on one factor of a (d1·d2)-dimensional operator.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    let n = m.dim()?;
    if n != d1 * d2 {
        return Err(Error::DimMismatch {
            expected: d1 * d2,
            found: n,
        });
    }
    let out = match keep {
        Subsystem::First => ComplexMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| m.get(i * d2 + k, j * d2 + k)).sum()
        }),
        Subsystem::Second => ComplexMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| m.get(k * d2 + i, k * d2 + j)).sum()
        }),
    };
    Ok(out)
}

/// exp(iθP) for an orthogonal projector P, via I + (e^{iθ} - 1)P.
pub fn projector_phase(p: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let d = p.nrows();
    let phase = Complex64::from_polar(1.0, theta) - ONE;
    ComplexMatrix::identity(d) + p.scale(phase)
}

/// Unitary DFT matrix F_{jk} = ω^{jk}/√d.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let angle = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        Complex64::from_polar(norm, angle)
    })
}
