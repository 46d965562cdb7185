use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

/// Exit status for malformed flags, config files, or input data.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for numerical failures inside the library.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for file-system failures.
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } | CliError::Csv { .. } | CliError::Json { .. } => EXIT_IO,
        })
    }
}

impl From<sparsity_core::Error> for CliError {
    fn from(e: sparsity_core::Error) -> Self {
        use sparsity_core::Error as E;
        match e {
            E::InvalidArgument { .. } | E::Dimension(_) => CliError::Usage(e.to_string()),
            E::RankDeficient { .. } | E::ZeroColumn(_) | E::BracketExhausted { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
