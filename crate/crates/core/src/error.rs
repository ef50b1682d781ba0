use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("zero-width spectrum: all {count} eigenvalues equal {value}")]
    ZeroWidthSpectrum { count: usize, value: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("quadrature did not converge on [{a}, {b}] (best estimate {best_estimate:e}, error estimate {error_estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        best_estimate: f64,
        error_estimate: f64,
    },

    #[error("localization failure: {0}")]
    Localization(String),

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("out of support: {0}")]
    OutOfSupport(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("{path}:{line}: parse error: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("cache invalid ({path}): {reason}")]
    CacheInvalid { path: PathBuf, reason: String },

    #[error("cache policy: {0}")]
    CachePolicy(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line tool.
    ///
    /// 2 for configuration problems, 4 for cache policy failures and 3 for
    /// everything that went wrong while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse { .. } | Error::Validation { .. } | Error::Configuration(_) => 2,
            Error::CachePolicy(_) => 4,
            _ => 3,
        }
    }
}
