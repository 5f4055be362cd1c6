//! Command-line errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] bosonic_polar::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 0 success, 1 I/O, 2 usage or unsupported request, 3 numeric
    /// failure, 4 truncation error.
    pub fn exit_code(&self) -> i32 {
        use bosonic_polar::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::Unsupported(_)) => 2,
            CliError::Core(E::NumericFailure(_) | E::Domain(_)) => 3,
            CliError::Core(E::Truncation(_)) => 4,
            CliError::Io(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
