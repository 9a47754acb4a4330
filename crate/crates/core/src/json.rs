//! JSON wire formats. Complex numbers are always `[re, im]` pairs and
//! matrices are row-major.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::KdTable;
use crate::linalg::ComplexMatrix;
use crate::optimize::{EffectwiseSupremum, SupremumResult};
use crate::state::{DensityMatrix, Povm, RankOnePvm};
use crate::uncertainty::{Decomposition, Flavor};
use crate::witness::WitnessReport;

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub d: usize,
    pub re_im: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            d: m.nrows(),
            re_im: m.row_major().into_iter().map(pair).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let entries: Vec<Complex64> = self.re_im.iter().copied().map(unpair).collect();
        ComplexMatrix::from_row_major(self.d, self.d, &entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub d: usize,
    pub effects: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl PovmJson {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            d: p.dim(),
            effects: p.effects().iter().map(MatrixJson::from_matrix).collect(),
            labels: Some(p.labels().to_vec()),
        }
    }

    pub fn to_povm(&self) -> Result<Povm> {
        let effects = self
            .effects
            .iter()
            .map(|e| {
                if e.d != self.d {
                    return Err(Error::DimMismatch {
                        expected: self.d,
                        found: e.d,
                    });
                }
                e.to_matrix()
            })
            .collect::<Result<Vec<_>>>()?;
        match &self.labels {
            Some(labels) => Povm::with_labels(effects, labels.clone()),
            None => Povm::new(effects),
        }
    }
}

/// A measurement file holds either a POVM or a unitary whose columns are a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementJson {
    Povm(PovmJson),
    Basis(MatrixJson),
}

impl MeasurementJson {
    pub fn to_povm(&self) -> Result<Povm> {
        match self {
            MeasurementJson::Povm(p) => p.to_povm(),
            MeasurementJson::Basis(m) => Ok(RankOnePvm::from_unitary(m.to_matrix()?)?.as_povm()),
        }
    }

    /// Accepts a unitary, or a POVM whose effects are rank-1 projectors onto an
    /// orthonormal basis.
    pub fn to_pvm(&self) -> Result<RankOnePvm> {
        match self {
            MeasurementJson::Basis(m) => RankOnePvm::from_unitary(m.to_matrix()?),
            MeasurementJson::Povm(p) => {
                let povm = p.to_povm()?;
                let d = povm.dim();
                if povm.len() != d {
                    return Err(Error::BadRank { rank: povm.len(), dim: d });
                }
                let columns: Vec<Vec<Complex64>> = povm
                    .effects()
                    .iter()
                    .map(|e| {
                        let basis = crate::linalg::hermitian_eigenbasis(e);
                        basis.column(0)
                    })
                    .collect();
                let u = ComplexMatrix::from_fn(d, d, |i, j| columns[j][i]);
                let pvm = RankOnePvm::from_unitary(u)?;
                let deviation = povm
                    .effects()
                    .iter()
                    .zip(pvm.projectors())
                    .map(|(e, p)| e.max_abs_diff(&p))
                    .fold(0.0, f64::max);
                if deviation > 1e-9 {
                    return Err(Error::NotProjector {
                        reason: "rank-1",
                        deviation,
                    });
                }
                Ok(pvm)
            }
        }
    }
}

pub fn parse_state(text: &str) -> std::result::Result<DensityMatrix, WireError> {
    let m: MatrixJson = serde_json::from_str(text)?;
    Ok(DensityMatrix::new(m.to_matrix()?)?)
}

pub fn parse_measurement(text: &str) -> std::result::Result<MeasurementJson, WireError> {
    Ok(serde_json::from_str(text)?)
}

/// Either malformed JSON or a well-formed value that fails validation.
#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdTableJson {
    pub n_a: usize,
    pub n_b: usize,
    pub values: Vec<[f64; 2]>,
}

impl From<&KdTable> for KdTableJson {
    fn from(t: &KdTable) -> Self {
        Self {
            n_a: t.n_a,
            n_b: t.n_b,
            values: t.values.iter().copied().map(pair).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupremumResultJson {
    pub value: f64,
    pub best_basis: MatrixJson,
    pub per_restart_values: Vec<f64>,
    pub best_restart: usize,
    pub converged: bool,
    pub iterations_used: usize,
}

impl From<&SupremumResult> for SupremumResultJson {
    fn from(r: &SupremumResult) -> Self {
        Self {
            value: r.value,
            best_basis: MatrixJson::from_matrix(r.best_basis.unitary()),
            per_restart_values: r.per_restart_values.clone(),
            best_restart: r.best_restart,
            converged: r.converged,
            iterations_used: r.iterations_used,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub converged: bool,
    pub iterations_used: usize,
    pub per_effect: Vec<SupremumResultJson>,
}

impl From<&EffectwiseSupremum> for DiagnosticsJson {
    fn from(s: &EffectwiseSupremum) -> Self {
        Self {
            converged: s.converged(),
            iterations_used: s.iterations_used(),
            per_effect: s.per_effect.iter().map(SupremumResultJson::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub flavor: Flavor,
    pub total: f64,
    pub quantum: f64,
    pub classical: f64,
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsJson>,
}

impl From<&Decomposition> for DecompositionJson {
    fn from(d: &Decomposition) -> Self {
        Self {
            flavor: d.flavor,
            total: d.total,
            quantum: d.quantum,
            classical: d.classical,
            probs: d.probs.clone(),
            diagnostics: d.diagnostics.as_ref().map(DiagnosticsJson::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntryJson {
    pub a: usize,
    pub b: usize,
    pub weak_value: [f64; 2],
    pub basis: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReportJson {
    pub contextual: bool,
    pub nre: f64,
    pub ncl: f64,
    pub threshold: f64,
    pub flavors_agree: bool,
    pub witness: Option<WitnessEntryJson>,
}

impl From<&WitnessReport> for WitnessReportJson {
    fn from(r: &WitnessReport) -> Self {
        Self {
            contextual: r.contextual,
            nre: r.nre,
            ncl: r.ncl,
            threshold: r.threshold,
            flavors_agree: r.flavors_agree,
            witness: r.witness.as_ref().map(|w| WitnessEntryJson {
                a: w.a,
                b: w.b,
                weak_value: pair(w.weak_value),
                basis: MatrixJson::from_matrix(w.basis.unitary()),
            }),
        }
    }
}
