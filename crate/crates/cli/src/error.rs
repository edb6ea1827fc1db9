//! Error classes and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario or command line; nothing was computed.
    #[error("parse error: {0}")]
    Parse(String),
    /// A computation failed after starting.
    #[error("numeric failure: {0}")]
    Numeric(#[from] ecopattern::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
