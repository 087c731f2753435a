use thiserror::Error;

/// Crate-wide error type. The CLI maps these onto process exit codes, so the
/// split between validation-type and solver-type variants is load-bearing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("map is not completely positive: {0}")]
    NotCompletelyPositive(String),

    #[error("reconstruction failed: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ReconstructionFailed { residual: f64, tol: f64 },

    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("probe state is not tomographically complete: operator Schmidt rank {rank} < {needed}")]
    NotTomographicallyComplete { rank: usize, needed: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Validation(_)
            | Error::InvalidInput(_)
            | Error::NotHermitian { .. }
            | Error::NotCompletelyPositive(_)
            | Error::NotTomographicallyComplete { .. } => 2,
            Error::SolverFailed(_) => 3,
            Error::ReconstructionFailed { .. } | Error::Verification(_) => 4,
        }
    }
}
