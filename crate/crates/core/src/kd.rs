//! Kirkwood-Dirac quasiprobability tables and their quantumness functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{projector_phase, ComplexMatrix, I};
use crate::state::{require_dim, DensityMatrix, Povm, RankOnePvm};

/// Pr_KD(a, b) = Tr{M^b M^a ϱ}, row-major with `a` as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdTable {
    pub n_a: usize,
    pub n_b: usize,
    pub state_dim: usize,
    pub values: Vec<Complex64>,
}

impl KdTable {
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.n_b + b]
    }

    pub fn total(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Σ_b Pr_KD(a, b), which should equal Tr{M^a ϱ}.
    pub fn marginal_first(&self) -> Vec<Complex64> {
        (0..self.n_a)
            .map(|a| (0..self.n_b).map(|b| self.get(a, b)).sum())
            .collect()
    }

    /// Σ_a Pr_KD(a, b), which should equal Tr{M^b ϱ}.
    pub fn marginal_second(&self) -> Vec<Complex64> {
        (0..self.n_b)
            .map(|b| (0..self.n_a).map(|a| self.get(a, b)).sum())
            .collect()
    }

    /// Same table with the roles of the two measurements' indices swapped.
    pub fn transposed(&self) -> KdTable {
        let mut values = Vec::with_capacity(self.values.len());
        for b in 0..self.n_b {
            for a in 0..self.n_a {
                values.push(self.get(a, b));
            }
        }
        KdTable {
            n_a: self.n_b,
            n_b: self.n_a,
            state_dim: self.state_dim,
            values,
        }
    }
}

pub fn kd_table(state: &DensityMatrix, first: &Povm, second: &Povm) -> Result<KdTable> {
    let d = state.dim();
    require_dim(d, first.dim())?;
    require_dim(d, second.dim())?;
    let rho = state.matrix();
    let mut values = Vec::with_capacity(first.len() * second.len());
    for ma in first.effects() {
        let ma_rho = ma * rho;
        for mb in second.effects() {
            values.push(trace_of_product(mb, &ma_rho));
        }
    }
    Ok(KdTable {
        n_a: first.len(),
        n_b: second.len(),
        state_dim: d,
        values,
    })
}

/// Tr{XY} without forming the product.
pub(crate) fn trace_of_product(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    let n = x.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += x.get(i, k) * y.get(k, i);
        }
    }
    acc
}

/// l1-norm of the imaginary parts.
pub fn table_nonreality(t: &KdTable) -> f64 {
    t.values.iter().map(|z| z.im.abs()).sum()
}

/// Σ|Pr_KD| − 1, clamped at zero when roundoff pushes it slightly negative.
pub fn table_nonclassicality(t: &KdTable) -> f64 {
    let raw = t.values.iter().map(|z| z.norm()).sum::<f64>() - 1.0;
    clamp_tiny_negative(raw)
}

pub(crate) fn clamp_tiny_negative(x: f64) -> f64 {
    if (-1e-9..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// ΠϱΠ + (I−Π)ϱ(I−Π) with no validation.
pub(crate) fn binary_dephase(rho: &ComplexMatrix, p: &ComplexMatrix) -> ComplexMatrix {
    let q = ComplexMatrix::identity(rho.nrows()) - p.clone();
    p * rho * p + &q * rho * &q
}

/// The three pieces of one KD entry for a pair of rank-1 bases.
///
/// `sequential + interference + i·imaginary` reproduces Pr_KD(a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JohansenComponent {
    /// Tr{Π^b Π^a ϱ Π^a}.
    pub sequential: f64,
    /// ½ Tr{(ϱ − ϱ_{Π^a}) Π^b}.
    pub interference: f64,
    /// Coefficient of i, equal to ½ Tr{(ϱ − ϱ_{Π^a}) Π^{b|a}_{π/2}}.
    pub imaginary: f64,
}

impl JohansenComponent {
    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.sequential + self.interference, 0.0) + I * self.imaginary
    }
}

/// Splits each KD entry into its sequential-measurement, interference and
/// imaginary parts, with Π^{b|a}_{π/2} = e^{iΠ^aπ/2} Π^b e^{−iΠ^aπ/2}.
pub fn johansen_components(
    state: &DensityMatrix,
    first: &RankOnePvm,
    second: &RankOnePvm,
) -> Result<Vec<Vec<JohansenComponent>>> {
    let d = state.dim();
    require_dim(d, first.dim())?;
    require_dim(d, second.dim())?;
    let rho = state.matrix();
    let second_projs = second.projectors();
    let mut out = Vec::with_capacity(d);
    for pa in first.projectors() {
        let disturbed = rho - &binary_dephase(rho, &pa);
        let selected = &pa * rho * &pa;
        let rot = projector_phase(&pa, std::f64::consts::FRAC_PI_2);
        let rot_inv = rot.adjoint();
        let row = second_projs
            .iter()
            .map(|pb| {
                let rotated = &rot * pb * &rot_inv;
                JohansenComponent {
                    sequential: trace_of_product(pb, &selected).re,
                    interference: 0.5 * trace_of_product(&disturbed, pb).re,
                    imaginary: 0.5 * trace_of_product(&disturbed, &rotated).re,
                }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}
