use std::path::PathBuf;

use capwater_core::CapacityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CapacityError),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("malformed model in {path}: {source}")]
    ModelJson { path: PathBuf, source: serde_json::Error },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("cannot encode output: {0}")]
    Encode(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Read { .. } => "io",
            CliError::ModelJson { .. } => "model_json",
            CliError::Write(_) => "io",
            CliError::Encode(_) => "encode",
            CliError::Usage(_) => "usage",
            CliError::Verification(_) => "verification_failed",
        }
    }

    /// 2 for numerical failures, 3 for failed verification checks, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}
