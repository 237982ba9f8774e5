use std::io;
use std::path::PathBuf;

use pumbo_core::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("{path}: {msg}")]
    Data { path: PathBuf, msg: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("serializing output: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit status for each failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Data { .. } | CliError::Json(_) => exit::DATA,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Config(_) | CoreError::InvalidArgument(_) => exit::USAGE,
        CoreError::Empty
        | CoreError::DimensionMismatch { .. }
        | CoreError::LengthMismatch { .. }
        | CoreError::NonFinite(_)
        | CoreError::ConflictingDuplicate { .. }
        | CoreError::UndefinedMetric => exit::DATA,
        CoreError::IllConditioned { .. }
        | CoreError::SubdomainSearchFailed { .. }
        | CoreError::RadiusSearchDefect { .. } => exit::NUMERICAL,
        CoreError::Subdomain { source, .. } => core_exit_code(source),
    }
}
