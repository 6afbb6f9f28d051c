use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rqproc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input file; `row` is the 1-based data row (header excluded).
    #[error("{path}: row {row}, column '{column}': {message}")]
    Parse { path: PathBuf, row: usize, column: String, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{failures} replications failed, more than the allowed {cap}")]
    TooManyFailures { failures: usize, cap: usize },
}

impl CliError {
    /// Process exit code: 2 for bad input or flags, 3 rank deficiency,
    /// 4 non-monotone process, 5 solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use rqproc_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Format { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::RankDeficient { .. } => 3,
                E::NotMonotone { .. } => 4,
                E::NonConvergence { .. } | E::PivotCycle { .. } => 5,
                E::DimensionMismatch { .. } | E::OutOfRange { .. } | E::NonFinite { .. } | E::InvalidRanks { .. } => 2,
                E::SingularBasis { .. } | E::NoSuchInterval { .. } => 1,
            },
            CliError::Io { .. } | CliError::TooManyFailures { .. } => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
