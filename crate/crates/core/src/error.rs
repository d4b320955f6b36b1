use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("bad dimension {0}: need at least 2")]
    BadDimension(usize),

    #[error("map is not linear (superposition defect {defect:e})")]
    NotLinear { defect: f64 },

    #[error("map is not trace preserving (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("Kraus operators are incomplete (defect {defect:e})")]
    IncompleteKraus { defect: f64 },

    #[error("map is not completely positive (min eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("time step too large: dt * rate = {product:e} exceeds {limit:e}")]
    StepTooLarge { product: f64, limit: f64 },

    #[error("state failed validation at step {step}: {reason}")]
    ValidationFailure { step: usize, reason: String },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("generator matrix G must be diagonal (max off-diagonal {defect:e})")]
    NonDiagonalG { defect: f64 },

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("Kraus channel has no operators")]
    EmptyKraus,
}

pub type Result<T> = std::result::Result<T, Error>;
