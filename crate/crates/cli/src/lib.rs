//! Command-line front end: dataset generation, training, hashing and
//! benchmarking over the `wtahash` library.

pub mod args;
pub mod commands;
pub mod format;
pub mod run_config;

use std::io;

use format::FormatError;

/// Errors surfaced to the user, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration (exit code 2).
    #[error("{0}")]
    Config(String),
    /// Unreadable, malformed or mismatched data (exit code 3).
    #[error("{0}")]
    Data(String),
    /// A broken internal invariant (exit code 4).
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<wtahash::Error> for CliError {
    fn from(e: wtahash::Error) -> Self {
        use wtahash::Error as E;
        match e {
            E::InvalidArgument(_) | E::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a path to an I/O error.
pub(crate) fn io_context(path: &std::path::Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}
