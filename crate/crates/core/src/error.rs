use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("map is not completely positive (minimum Gram eigenvalue {min_eigenvalue:.6e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("element not in span of {what} (residual {residual:.3e})")]
    NotInSpan { what: String, residual: f64 },

    #[error("algebra is not abelian (max commutator {residual:.3e})")]
    NotAbelian { residual: f64 },

    #[error("algebra closure check failed: {what} (residual {residual:.3e})")]
    ClosureFailure { what: String, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear system inconsistent: {what} (residual {residual:.3e})")]
    Inconsistent { what: String, residual: f64 },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("global dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("decomposition did not reach irreducible pieces: {0}")]
    DecompositionStalled(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
