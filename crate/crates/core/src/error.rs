use std::path::PathBuf;

use thiserror::Error;

use crate::shifted::GuardRejection;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Argument outside the domain where an operation is defined, e.g. a
    /// nonpositive `sigma + alpha`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stored pair produced `s^T B s <= 0` during unrolling.
    #[error("inconsistent pairs: s_{index}^T B_{index} s_{index} = {value:e} is not positive")]
    Inconsistent { index: usize, value: f64 },

    #[error("nonpositive pivot {pivot:e} at row {row} (shifted operator is not SPD)")]
    NonPositivePivot { row: usize, pivot: f64 },

    #[error("guard rejected the pairs: {0}")]
    GuardRejected(GuardRejection),

    /// A recursion denominator fell below the Lemma-style lower bound.
    #[error("stability bound violated at index {index}: denominator {denominator:e} < bound {bound:e}")]
    Stability { index: usize, denominator: f64, bound: f64 },

    #[error("did not converge in {iterations} iterations (relative residual {rel_residual:e})")]
    NotConverged {
        iterations: usize,
        rel_residual: f64,
        best: Vec<f64>,
    },

    #[error("dense oracle refused: n = {n} exceeds cap {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("dense factorization failed: matrix is not positive definite")]
    DenseFactorization,

    #[error("L-BFGS converged after {collected} of {requested} pairs")]
    EarlyConvergence { collected: usize, requested: usize },

    #[error("line search failed at iteration {iteration}")]
    LineSearch { iteration: usize },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
