//! Minimal dense linear algebra: tall-skinny QR, Gaussian sampling and
//! Jacobi routines for small matrices.

mod jacobi;
mod matrix;
mod qr;
mod rng;

pub use jacobi::{singular_values_small, smallest_singular_value, symmetric_eigen, SMALL_LIMIT};
pub use matrix::{dot, norm, DenseMatrix};
pub use qr::{householder_qr_into, qr_decompose, RANK_TOLERANCE};
pub use rng::{gaussian_matrix, RngState, RNG_ALGORITHM};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}
