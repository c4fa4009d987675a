use std::io;

use thiserror::Error;

/// Errors raised by the model, the file readers and the configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the physical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are well-formed but inconsistent (overlapping events, empty ranges, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// Malformed configuration or data file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
