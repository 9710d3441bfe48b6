//! Error type shared across the crate.

use std::fmt;
use std::io;

/// Errors produced by index construction, model fitting, data handling and
/// the benchmark harness.
#[derive(Debug)]
pub enum Error {
    /// A point set, label set, subsample or query batch was empty where a
    /// nonempty one is required.
    Empty(String),
    /// A feature vector did not match the expected dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// An argument was outside its valid range.
    InvalidArgument(String),
    /// A model was used in the wrong mode (classification vs regression).
    ModeMismatch(String),
    /// Delimited-text parsing failed; the row number is 1-based and counts
    /// data rows, not the header.
    Parse { row: usize, message: String },
    /// Underlying I/O failure.
    Io(io::Error),
    /// A persisted model file was malformed or has an unsupported version.
    ModelFormat(String),
    /// Malformed command-line input.
    Usage(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::ModeMismatch(msg) => write!(f, "mode mismatch: {msg}"),
            Error::Parse { row, message } => write!(f, "parse error at row {row}: {message}"),
            Error::Io(err) => write!(f, "io error: {err}"),
            Error::ModelFormat(msg) => write!(f, "model format error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
        }
    }
}

impl Error {
    /// Process exit code: 2 for usage and I/O problems, 1 for computation
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse { .. } | Error::ModelFormat(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!("is_io_error guarantees an io kind"),
            }
        } else {
            Error::Parse { row: 0, message: err.to_string() }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
