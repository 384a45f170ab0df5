use std::path::PathBuf;

use flipdec::analysis::AnalysisError;
use flipdec::{BitError, CodeError, DecodeError, HarnessError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    /// 0 success, 1 usage or configuration problem, 2 decoder limit refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Decode(DecodeError::LimitExceeded { .. })
            | Self::Harness(HarnessError::Decode(DecodeError::LimitExceeded { .. })) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
