use thiserror::Error;

/// Errors produced by the estimators and their building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown state family `{0}`")]
    UnknownFamily(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix lies outside the family subspace (residual {residual:.3e})")]
    OutOfSubspace { residual: f64 },

    #[error("invalid partition: {n_a} x {n_b} does not match dimension {n}")]
    InvalidPartition { n: usize, n_a: usize, n_b: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate direction: no interior point along either side of the chord")]
    DegenerateDirection,

    #[error("insufficient statistics: every repetition aborted (per-phase state hits of last attempt: {hits:?})")]
    InsufficientStatistics { hits: Vec<u64> },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
