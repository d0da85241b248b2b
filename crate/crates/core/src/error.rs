use std::io;

use thiserror::Error;

/// Errors produced anywhere in the similarity pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("median squared pairwise distance is zero; pass an explicit bandwidth")]
    DegenerateBandwidth,

    #[error("degree of node {0} is not positive")]
    ZeroDegree(usize),

    #[error("operator of size {size} exceeds the dense limit of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("operation requires a materialized dense operator")]
    RequiresDense,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("reference row {0} is identically zero in the selected eigenbasis")]
    ZeroReference(usize),

    #[error("residual {residual:e} exceeds threshold {threshold:e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures caused by the computation itself rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::ResidualTooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
