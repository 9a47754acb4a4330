//! Validated quantum objects: states, POVMs and rank-1 projective bases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, fourier_matrix, hermitian_eigenvalues, tensor, ComplexMatrix, HERMITIAN_TOL, I, ONE, ZERO,
};

/// Tolerance on ‖Σ_a M^a − I‖_max and on projector-basis completeness.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Trace-one positive-semidefinite Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

/// Checks a candidate density matrix and wraps it.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityMatrix> {
    m.dim()?;
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let deviation = (m.trace() - ONE).norm();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotUnitTrace { deviation });
    }
    let min_eigenvalue = hermitian_eigenvalues(&m).last().copied().unwrap_or(0.0);
    if min_eigenvalue < -HERMITIAN_TOL {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(DensityMatrix { matrix: m })
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        validate_density(m)
    }

    /// Pure state |ψ><ψ|; the vector is normalized first.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnitTrace { deviation: 1.0 });
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&v))
    }

    /// I/d.
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// Uniform superposition Σ_j |j>/√d.
    pub fn maximally_coherent(d: usize) -> Self {
        let amp = c(1.0 / (d as f64).sqrt(), 0.0);
        Self {
            matrix: ComplexMatrix::projector(&vec![amp; d]),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(probs))
    }

    /// Callers guarantee validity, e.g. after a unitary conjugation.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Tr ϱ².
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// VϱV†.
    pub fn conjugate(&self, v: &ComplexMatrix) -> Self {
        Self::from_trusted(v * &self.matrix * v.adjoint())
    }

    /// Σ_j w_j ϱ_j; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        check_weights(weights)?;
        let d = states.first().map_or(0, DensityMatrix::dim);
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            require_dim(d, s.dim())?;
            acc = acc + s.matrix.scale_real(*w);
        }
        Self::new(acc)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self::from_trusted(tensor(&self.matrix, &other.matrix))
    }

    pub fn commutes_with(&self, op: &ComplexMatrix, tol: f64) -> bool {
        self.matrix.commutator(op).max_abs() <= tol
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
        return Err(Error::BadDistribution {
            reason: "weight outside [0, 1]".into(),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > COMPLETENESS_TOL {
        return Err(Error::BadDistribution {
            reason: format!("weights sum to {total}"),
        });
    }
    Ok(())
}

pub(crate) fn require_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}

/// Finite list of PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

/// Checks effects and completeness; outcomes are labelled "0", "1", ...
pub fn validate_povm(effects: Vec<ComplexMatrix>) -> Result<Povm> {
    let labels = (0..effects.len()).map(|a| a.to_string()).collect();
    Povm::with_labels(effects, labels)
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        validate_povm(effects)
    }

    pub fn with_labels(effects: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyPovm)?;
        let dim = first.dim()?;
        if labels.len() != effects.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                effects: effects.len(),
            });
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (index, e) in effects.iter().enumerate() {
            require_dim(dim, e.dim()?)?;
            let herm = e.hermiticity_deviation();
            if herm > HERMITIAN_TOL {
                return Err(Error::EffectNotPsd {
                    index,
                    reason: format!("not Hermitian (deviation {herm:e})"),
                });
            }
            let min = hermitian_eigenvalues(e).last().copied().unwrap_or(0.0);
            if min < -HERMITIAN_TOL {
                return Err(Error::EffectNotPsd {
                    index,
                    reason: format!("min eigenvalue {min:e}"),
                });
            }
            sum = sum + e.clone();
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::IncompleteSum { deviation });
        }
        Ok(Self { dim, effects, labels })
    }

    pub(crate) fn from_trusted(dim: usize, effects: Vec<ComplexMatrix>, labels: Vec<String>) -> Self {
        Self { dim, effects, labels }
    }

    /// Totally degenerate POVM with n effects I/n.
    pub fn trivial(d: usize, n: usize) -> Self {
        let e = ComplexMatrix::identity(d).scale_real(1.0 / n as f64);
        Self::from_trusted(d, vec![e; n], (0..n).map(|a| a.to_string()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, a: usize) -> &ComplexMatrix {
        &self.effects[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// {V M^a V†}.
    pub fn conjugate(&self, v: &ComplexMatrix) -> Self {
        let vd = v.adjoint();
        let effects = self.effects.iter().map(|e| v * e * &vd).collect();
        Self::from_trusted(self.dim, effects, self.labels.clone())
    }

    /// Reorders effects so that outcome `k` of the result is outcome `perm[k]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::BadPartition {
                reason: "not a permutation of the outcome indices".into(),
            });
        }
        Ok(Self::from_trusted(
            self.dim,
            perm.iter().map(|&p| self.effects[p].clone()).collect(),
            perm.iter().map(|&p| self.labels[p].clone()).collect(),
        ))
    }

    /// Σ_k q_k M^{a,k} over POVMs with the same outcome count.
    pub fn mixture(weights: &[f64], povms: &[Povm]) -> Result<Self> {
        check_weights(weights)?;
        let first = povms.first().ok_or(Error::EmptyPovm)?;
        let mut effects = vec![ComplexMatrix::zeros(first.dim, first.dim); first.len()];
        for (w, p) in weights.iter().zip(povms) {
            require_dim(first.dim, p.dim)?;
            require_dim(first.len(), p.len())?;
            for (acc, e) in effects.iter_mut().zip(&p.effects) {
                *acc = &*acc + &e.scale_real(*w);
            }
        }
        Self::with_labels(effects, first.labels.clone())
    }

    /// Product POVM {M^a ⊗ N^b}, outcomes in a-major order.
    pub fn tensor(&self, other: &Povm) -> Self {
        let mut effects = Vec::with_capacity(self.len() * other.len());
        let mut labels = Vec::with_capacity(self.len() * other.len());
        for (ea, la) in self.effects.iter().zip(&self.labels) {
            for (eb, lb) in other.effects.iter().zip(&other.labels) {
                effects.push(tensor(ea, eb));
                labels.push(format!("{la},{lb}"));
            }
        }
        Self::from_trusted(self.dim * other.dim, effects, labels)
    }

    /// {M^a ⊗ I_d}.
    pub fn extend_with_identity(&self, d: usize) -> Self {
        let id = ComplexMatrix::identity(d);
        let effects = self.effects.iter().map(|e| tensor(e, &id)).collect();
        Self::from_trusted(self.dim * d, effects, self.labels.clone())
    }

    pub fn commutes_with(&self, state: &DensityMatrix, tol: f64) -> bool {
        self.effects.iter().all(|e| state.commutes_with(e, tol))
    }
}

/// Orthonormal basis {|b>}, stored as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOnePvm {
    unitary: ComplexMatrix,
}

impl RankOnePvm {
    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        u.dim()?;
        let deviation = u.unitarity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { unitary: u })
    }

    /// For unitaries produced by the optimizer, which stay unitary to roundoff.
    pub(crate) fn from_unitary_unchecked(u: ComplexMatrix) -> Self {
        Self { unitary: u }
    }

    pub fn computational(d: usize) -> Self {
        Self::from_unitary_unchecked(ComplexMatrix::identity(d))
    }

    /// Discrete Fourier basis, mutually unbiased with the computational basis.
    pub fn fourier(d: usize) -> Self {
        Self::from_unitary_unchecked(fourier_matrix(d))
    }

    /// Pauli-X eigenbasis (|+>, |->).
    pub fn qubit_x() -> Self {
        let s = c(0.5f64.sqrt(), 0.0);
        Self::from_unitary_unchecked(ComplexMatrix::from_rows(&[vec![s, s], vec![s, -s]]))
    }

    /// Pauli-Y eigenbasis (|y+>, |y->).
    pub fn qubit_y() -> Self {
        let s = 0.5f64.sqrt();
        Self::from_unitary_unchecked(ComplexMatrix::from_rows(&[
            vec![c(s, 0.0), c(s, 0.0)],
            vec![I * s, -I * s],
        ]))
    }

    /// Pauli-Z eigenbasis (|0>, |1>).
    pub fn qubit_z() -> Self {
        Self::computational(2)
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn vector(&self, b: usize) -> Vec<Complex64> {
        self.unitary.column(b)
    }

    pub fn projector(&self, b: usize) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vector(b))
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        (0..self.dim()).map(|b| self.projector(b)).collect()
    }

    /// <b|X|b> for every basis vector, i.e. the diagonal of U†XU.
    pub fn diagonal_of(&self, x: &ComplexMatrix) -> Vec<Complex64> {
        let rotated = self.unitary.adjoint() * x * &self.unitary;
        (0..self.dim()).map(|b| rotated.get(b, b)).collect()
    }

    pub fn as_povm(&self) -> Povm {
        let d = self.dim();
        Povm::from_trusted(d, self.projectors(), (0..d).map(|b| b.to_string()).collect())
    }

    pub fn tensor(&self, other: &RankOnePvm) -> Self {
        Self::from_unitary_unchecked(tensor(&self.unitary, &other.unitary))
    }

    pub fn conjugate(&self, v: &ComplexMatrix) -> Self {
        Self::from_unitary_unchecked(v * &self.unitary)
    }

    /// Largest deviation from Π^bΠ^{b'} = δ_{bb'}Π^b and Σ_b Π^b = I.
    pub fn projector_deviation(&self) -> f64 {
        let d = self.dim();
        let projs = self.projectors();
        let mut worst = projs
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, p| acc + p.clone())
            .max_abs_diff(&ComplexMatrix::identity(d));
        for (i, p) in projs.iter().enumerate() {
            for (j, q) in projs.iter().enumerate() {
                let prod = p * q;
                let dev = if i == j { prod.max_abs_diff(p) } else { prod.max_abs() };
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// |0>, |1>, ... as vectors.
pub fn basis_vector(d: usize, k: usize) -> Vec<Complex64> {
    (0..d).map(|j| if j == k { ONE } else { ZERO }).collect()
}
