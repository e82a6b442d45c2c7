use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] wpbc::Error),

    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid run specification: {0}")]
    Spec(String),

    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Self::Core(wpbc::Error::NumericalTrouble(_)))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
