use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e}){hint}")]
    NotPositiveDefinite { min_eigenvalue: f64, hint: String },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("covariance matrix is not pure (residual {0:.3e})")]
    NotPure(f64),

    #[error("subspace size k = {k} out of range 1..={d}")]
    SubspaceOutOfRange { k: usize, d: usize },

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("symplectic eigenvalue pairing broke down (relative mismatch {0:.3e})")]
    Pairing(f64),

    #[error("non-finite {what} at cost call {step}")]
    NonFinite { what: &'static str, step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NotPure(_)
                | Error::EigenSolver(_)
                | Error::Pairing(_)
                | Error::NonFinite { .. }
        )
    }
}
