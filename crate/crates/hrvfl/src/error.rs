//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric input that must be finite was NaN or infinite.
    #[error("non-finite value for {what}")]
    NonFinite { what: &'static str },

    /// An invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Dimension mismatch between arrays.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Training data contains only one class.
    #[error("training data must contain both classes")]
    SingleClass,

    /// The optimizer produced a non-finite iterate.
    ///
    /// `last_beta` holds the last finite parameter vector (converted to f64),
    /// `iter` the iteration at which the gradient or update became non-finite.
    #[error("optimizer diverged at iteration {iter} (last finite iterate of dimension {})", last_beta.len())]
    Divergence { iter: usize, last_beta: Vec<f64> },

    /// The symmetric linear solve failed (matrix not positive definite).
    #[error("linear solve failed: {0}")]
    LinAlg(String),

    /// A CSV cell could not be parsed. `row` is the 1-based data row index
    /// (excluding any header), `col` the 0-based column index.
    #[error("csv parse error at row {row}, column {col}: {message}")]
    CsvCell {
        row: usize,
        col: usize,
        message: String,
    },

    /// Malformed CSV structure or unsatisfiable schema.
    #[error("csv error: {0}")]
    Csv(String),

    /// Label column holds something other than exactly two distinct values.
    #[error("expected exactly two label classes, found {found}")]
    LabelClasses { found: usize },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed serialized artifact (model file, experiment config, ...).
    #[error("deserialization error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
