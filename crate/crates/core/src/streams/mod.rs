//! Point sources satisfying the bounded-norm, zero-mean stream model.
//!
//! Every point a source emits has finite entries and Euclidean norm at most 1.

mod bow;
mod source;
mod synthetic;

pub use bow::{load_bag_of_words, parse_bag_of_words, Dataset, SparsePoint, DATASET_NORMALIZATION};
pub use source::{make_stream, Backing, StreamSource};
pub use synthetic::{SamplerKind, SyntheticModel, SyntheticSpec};

use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Borrowed view of one data point.
#[derive(Clone, Copy, Debug)]
pub enum PointRef<'a> {
    Dense(&'a [f64]),
    Sparse(&'a SparsePoint),
}

impl PointRef<'_> {
    pub fn norm_squared(&self) -> f64 {
        match self {
            PointRef::Dense(x) => x.iter().map(|v| v * v).sum(),
            PointRef::Sparse(p) => p.values().iter().map(|v| v * v).sum(),
        }
    }

    /// `out[j] = x . q_j` for every column of `q`.
    #[inline]
    pub fn project(&self, q: &DenseMatrix, out: &mut [f64]) {
        debug_assert_eq!(out.len(), q.cols());
        match self {
            PointRef::Dense(x) => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = crate::linalg::dot(x, q.col(j));
                }
            }
            PointRef::Sparse(p) => {
                for (j, o) in out.iter_mut().enumerate() {
                    let col = q.col(j);
                    *o = p
                        .indices()
                        .iter()
                        .zip(p.values())
                        .map(|(&i, &v)| v * col[i as usize])
                        .sum();
                }
            }
        }
    }

    /// `target += coeff * x w^T`.
    #[inline]
    pub fn add_scaled_outer(&self, target: &mut DenseMatrix, coeff: f64, w: &[f64]) {
        debug_assert_eq!(w.len(), target.cols());
        for (j, &wj) in w.iter().enumerate() {
            let a = coeff * wj;
            if a == 0.0 {
                continue;
            }
            let col = target.col_mut(j);
            match self {
                PointRef::Dense(x) => {
                    for (t, &xi) in col.iter_mut().zip(x.iter()) {
                        *t += a * xi;
                    }
                }
                PointRef::Sparse(p) => {
                    for (&i, &v) in p.indices().iter().zip(p.values()) {
                        col[i as usize] += a * v;
                    }
                }
            }
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        match self {
            PointRef::Dense(x) => x.to_vec(),
            PointRef::Sparse(p) => {
                let mut out = vec![0.0; dim];
                for (&i, &v) in p.indices().iter().zip(p.values()) {
                    out[i as usize] = v;
                }
                out
            }
        }
    }
}

/// Rescales `x` so that its computed norm is at most 1.
///
/// Points are constructed to satisfy the bound already; this only absorbs
/// rounding when the bound is attained with equality.
pub(crate) fn clamp_unit_norm(x: &mut [f64]) {
    loop {
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if n2 <= 1.0 {
            return;
        }
        let scale = (1.0 - 1e-15) / n2.sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
    }
}
