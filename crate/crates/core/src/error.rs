use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not Hermitian positive semidefinite: {0}")]
    NotPsd(String),

    #[error("zero-norm combiner for tag {0}")]
    ZeroCombiner(usize),

    #[error("Cholesky factorization failed: {0}")]
    Cholesky(String),

    #[error("conic solver reported numerical trouble: {0}")]
    NumericalTrouble(String),

    #[error("rank-one recovery failed: {0}")]
    Extraction(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
