use thiserror::Error;

/// Errors produced by the library and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounds: low {low} > high {high}")]
    InvalidBounds { low: f64, high: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("matrix is not positive-definite")]
    NotPositiveDefinite,

    #[error("label {label} out of range 1..={class_count}")]
    InvalidLabel { label: usize, class_count: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
