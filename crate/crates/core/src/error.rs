use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the model library and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or table size is inconsistent with what an operation needs.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A cache or config file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A file parsed but violates a table invariant.
    #[error("validation error at line {line}: {message}")]
    Validation { line: usize, message: String },

    /// A value outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Accumulated roundoff produced a probability more negative than the
    /// clamping threshold allows.
    #[error("negative probability {value:e} for outcome {outcome}")]
    NegativeProbability { value: f64, outcome: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
