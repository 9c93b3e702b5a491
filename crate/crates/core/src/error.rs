//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by construction, validation and reduction routines.
///
/// Compatibility failures always carry the offending residual so callers can
/// distinguish a near-miss from a gross violation.
#[derive(Debug, Error)]
pub enum CgError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid rate matrix: {0}")]
    InvalidRateMatrix(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("generator is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid bipartition table: {0}")]
    InvalidTable(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("coarse-graining is incompatible with the dynamics (residual {residual:.3e}); pass force=true to reduce anyway")]
    Incompatible { residual: f64 },

    #[error("group closure exceeded the cap of {cap} elements")]
    ClosureCapExceeded { cap: usize },

    #[error("operator algebra closure exceeded the cap of {cap} dimensions")]
    AlgebraCapExceeded { cap: usize },

    #[error("block structure extraction failed after {retries} retries (worst residual {residual:.3e})")]
    BlockStructureFailure { retries: usize, residual: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CgError>;
