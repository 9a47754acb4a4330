use thiserror::Error;

/// Errors raised by validation and by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian: max |m - m^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("not unit trace: |tr - 1| = {deviation:e}")]
    NotUnitTrace { deviation: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("effect {index} is not a valid POVM element: {reason}")]
    EffectNotPsd { index: usize, reason: String },

    #[error("effects do not sum to identity: max |sum - I| = {deviation:e}")]
    IncompleteSum { deviation: f64 },

    #[error("POVM has no effects")]
    EmptyPovm,

    #[error("{labels} labels given for {effects} effects")]
    LabelMismatch { labels: usize, effects: usize },

    #[error("not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("not an orthogonal projector: {reason} deviation {deviation:e}")]
    NotProjector { reason: &'static str, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("rank {rank} out of range for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("need at least one outcome")]
    NoOutcomes,

    #[error("sum of sampled effects is singular: min eigenvalue {min_eigenvalue:e}")]
    SingularSum { min_eigenvalue: f64 },

    #[error("not a probability distribution: {reason}")]
    BadDistribution { reason: String },

    #[error("invalid partition: {reason}")]
    BadPartition { reason: String },

    #[error("contextual (nre = {nre:e}) but no strange weak value was located")]
    WitnessNotFound { nre: f64 },

    #[error("invalid optimizer configuration: {reason}")]
    BadConfig { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
