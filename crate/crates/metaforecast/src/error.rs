use std::path::PathBuf;

use metaforecast_core::data::DataError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("run failed: {0}")]
    Run(String),
}

impl HarnessError {
    /// Process exit status: 1 usage, 2 data, 3 run failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config { .. } | HarnessError::InvalidConfig(_) => 1,
            HarnessError::Read { .. } | HarnessError::Parse { .. } | HarnessError::Data(_) => 2,
            HarnessError::Write { .. } | HarnessError::Run(_) => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
