use thiserror::Error;

/// Errors surfaced by model construction, solvers, and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("weight vector violates the simplex: {0}")]
    Simplex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration cap exceeded: {0}")]
    EnumerationCapExceeded(String),

    #[error("unassigned voter: {0}")]
    UnassignedVoter(usize),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
