use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line tool, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] catex_core::Error),

    #[error("{path}: {message}")]
    FeatureFile { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Extraction {
        path: PathBuf,
        #[source]
        source: catex_core::Error,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 usage, 2 validation, 3 I/O, 4 verification failure.
    pub fn exit_code(&self) -> i32 {
        use catex_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) | CliError::Extraction { source: e, .. } => match e {
                E::Io { .. } | E::Format { .. } => 3,
                _ => 2,
            },
            CliError::FeatureFile { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Verification(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
