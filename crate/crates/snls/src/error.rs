use snls_core::SnlsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] SnlsError),
    #[error("runtime failure: {0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 0 success, 1 validation, 2 runtime, 3 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) | LabError::Json(_) => 1,
            LabError::Core(e) => match e {
                SnlsError::InvalidGrid(_)
                | SnlsError::InvalidParameter(_)
                | SnlsError::EnergySupercritical { .. }
                | SnlsError::UnsupportedDimension(_)
                | SnlsError::BandExceeded(_)
                | SnlsError::AsymmetricAmplitudes(_)
                | SnlsError::AboveAdditiveThreshold(_)
                | SnlsError::NotApplicable(_)
                | SnlsError::HashMismatch { .. } => 1,
                _ => 2,
            },
            LabError::Runtime(_) | LabError::Io { .. } | LabError::Csv(_) => 2,
            LabError::Verification(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
