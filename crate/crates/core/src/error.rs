use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("orbit diverged at step {step}")]
    Diverged { step: usize },

    /// Non-finite value while extending a recurrence or multiplying matrices.
    /// `row` is 1-based, `index` is the sequence index being computed.
    #[error("overflow at row {row}, index {index}")]
    Overflow { row: usize, index: i64 },

    #[error("singular matrix (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("degenerate spectrum: eigenvalue gap {gap:e} below tolerance")]
    DegenerateSpectrum { gap: f64 },

    #[error("matrix has an eigenvalue at 1 (|1 - tau + delta| = {denominator:e})")]
    EigenvalueOne { denominator: f64 },

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
        max_residual: f64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
