use thiserror::Error;

use crate::linalg::CMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e}, allowed {tolerance:.3e})")]
    NonHermitianInput { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator trace {trace} is not 1")]
    NotNormalized { trace: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("function undefined on eigenvalue {eigenvalue:.6e}")]
    DomainError { eigenvalue: f64 },

    #[error("base operator is singular (min eigenvalue {min_eigenvalue:.3e})")]
    SingularBase { min_eigenvalue: f64 },

    #[error("operator pair has empty support")]
    EmptySupport,

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("quadrature did not converge (gap {gap:.3e})")]
    QuadratureDidNotConverge {
        last: Box<CMatrix>,
        previous: Box<CMatrix>,
        gap: f64,
    },

    #[error("fixed-point iteration did not converge after {} steps (last residual {:.3e})", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    DidNotConverge { residuals: Vec<f64> },

    #[error("label map does not match the measurement: {0}")]
    LabelMismatch(String),

    #[error("enumeration of {count} configurations exceeds the cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("constraint set has zero probability")]
    EmptyConstraint,

    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
