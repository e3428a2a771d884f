use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants are coarse on purpose: the CLI maps each one onto a distinct
/// exit code, and callers mostly need to tell bad input apart from a broken
/// caller contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed file contents. `offset` is a byte offset for binary formats
    /// and a 1-based line number for text formats (see `unit`).
    #[error("format error at {unit} {offset}: {message}")]
    Format {
        offset: u64,
        unit: OffsetUnit,
        message: String,
    },

    /// A documented precondition of an operation was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A statistic is undefined for the given input (e.g. a rank correlation
    /// over a constant series).
    #[error("undefined statistic: {0}")]
    Undefined(String),

    /// A benchmark-level consistency check failed.
    #[error("benchmark check failed: {0}")]
    Bench(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetUnit {
    Byte,
    Line,
}

impl std::fmt::Display for OffsetUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OffsetUnit::Byte => f.write_str("byte"),
            OffsetUnit::Line => f.write_str("line"),
        }
    }
}

impl Error {
    pub(crate) fn at_byte(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            unit: OffsetUnit::Byte,
            message: message.into(),
        }
    }

    pub(crate) fn at_line(line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset: line,
            unit: OffsetUnit::Line,
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Format { .. } => "format",
            Error::Contract(_) => "contract",
            Error::Undefined(_) => "undefined",
            Error::Bench(_) => "bench",
            Error::Serde(_) => "serde",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
