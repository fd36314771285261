//! Complex sparse and dense linear algebra used by the solvers.

pub mod dense;
pub mod matrix_market;
mod powered;
mod sparse;
mod vector;

use thiserror::Error;

pub use dense::{dense_eigendecomposition, dense_solve, Eigen};
pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market, MatrixMarketError};
pub use powered::{geometric_sum_apply, PoweredOperator};
pub use sparse::ComplexSparseMatrix;
pub use vector::ComplexVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) outside a {n_rows} x {n_cols} matrix")]
    IndexOutOfBounds { row: usize, col: usize, n_rows: usize, n_cols: usize },
    #[error("invalid CSR layout: {0}")]
    InvalidCsr(&'static str),
    #[error("non-finite vector entry at index {index}")]
    NonFinite { index: usize },
    #[error("matrix power must be at least 1")]
    InvalidPower,
    #[error("dense eigensolver limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("dense eigensolver did not converge")]
    ConvergenceFailure,
    #[error("matrix is singular")]
    Singular,
}
