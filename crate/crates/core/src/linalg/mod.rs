//! Sparse real vectors and matrices with the operations the operator
//! semantics is built from: Kronecker products, matrix units, norms, and
//! Moore-Penrose pseudo-inverses of full-column-rank matrices.

mod io;
mod matrix;
mod vector;

pub use io::{
    matrix_from_json, matrix_from_matrix_market, matrix_to_json, matrix_to_matrix_market,
};
pub use matrix::SparseMatrix;
pub use vector::StateVector;

use thiserror::Error;

/// Stored entries with absolute value at or below this threshold are dropped.
pub const PRUNE_EPS: f64 = 1e-15;

/// Default cap on `rows * cols` of a constructed operator. Kronecker products
/// and operator assembly refuse to build anything past this.
pub const DEFAULT_SIZE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("state-space blow-up: {rows} x {cols} exceeds limit of {limit} potential entries")]
    SizeLimit {
        rows: usize,
        cols: usize,
        limit: u128,
    },
    #[error("abstraction not full column rank")]
    RankDeficient,
    #[error("matrix format error: {0}")]
    Format(String),
}
