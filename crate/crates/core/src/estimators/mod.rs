//! The four streaming PCA estimators behind one interface.
//!
//! * SPCA: `Q <- QR(Q + (c / (n0 + n)) x x^T Q)`, a decaying-rate Oja update.
//! * Alecton: the same update with a fixed rate.
//! * DBPCA: block power method, `S_i = (1/|I_i|) sum x x^T Q_{i-1}` then
//!   `Q_i <- QR(S_i)`, with block sizes growing geometrically by `1/gamma^2`
//!   (or following the analytic schedule in [`theoretical_block_size`]).
//! * BPCA: the block power method with a fixed block size.
//!
//! Every estimator keeps `Q` plus one `d x k` scratch/accumulator matrix.

mod schedule;
mod state;

pub use schedule::{
    bpca_block_from_corpus, bpca_block_with_log_base, next_geometric_block, theoretical_block_size,
    ScheduleConstants, ScheduleParams,
};
pub use state::StreamingPca;

use std::fmt;

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The accumulated block matrix lost rank, so no basis can be extracted.
    #[error("degenerate block {block_index}: accumulator is rank deficient at column {column}")]
    DegenerateBlock { block_index: u64, column: usize },
    #[error("rank-deficient update at step {step}, column {column}")]
    RankDeficient { step: u64, column: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Algorithm family, used to group grid entries for best-parameter tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Spca,
    Alecton,
    Dbpca,
    Bpca,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Spca, Family::Alecton, Family::Dbpca, Family::Bpca];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Spca => "spca",
            Family::Alecton => "alecton",
            Family::Dbpca => "dbpca",
            Family::Bpca => "bpca",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How DBPCA sizes its blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockSchedule {
    /// Start at `initial_block` (default `2k`) and grow by `ceil(s / gamma_sq)`.
    Geometric { gamma_sq: f64, initial_block: Option<u64> },
    /// Sizes from [`theoretical_block_size`]; requires knowing the spectrum.
    Theoretical(ScheduleParams),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    /// Step size `c / (n0 + n)` at the `n`-th point.
    Spca { c: f64, n0: f64 },
    Alecton { rate: f64 },
    Dbpca(BlockSchedule),
    Bpca { block: u64 },
}

impl Algorithm {
    pub fn family(&self) -> Family {
        match self {
            Algorithm::Spca { .. } => Family::Spca,
            Algorithm::Alecton { .. } => Family::Alecton,
            Algorithm::Dbpca(_) => Family::Dbpca,
            Algorithm::Bpca { .. } => Family::Bpca,
        }
    }

    /// Short human-readable parameter description, e.g. `spca c=100`.
    pub fn describe(&self) -> String {
        match self {
            Algorithm::Spca { c, n0 } if *n0 == 0.0 => format!("spca c={c}"),
            Algorithm::Spca { c, n0 } => format!("spca c={c} n0={n0}"),
            Algorithm::Alecton { rate } => format!("alecton rate={rate}"),
            Algorithm::Dbpca(BlockSchedule::Geometric { gamma_sq, initial_block }) => match initial_block {
                Some(b) => format!("dbpca gamma_sq={gamma_sq} initial_block={b}"),
                None => format!("dbpca gamma_sq={gamma_sq}"),
            },
            Algorithm::Dbpca(BlockSchedule::Theoretical(p)) => format!(
                "dbpca theoretical lambda_k={} lambda_k1={} delta0={} c={} cbar={}",
                p.lambda_k, p.lambda_k1, p.delta0, p.chernoff_c, p.cbar
            ),
            Algorithm::Bpca { block } => format!("bpca block={block}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub k: usize,
    pub init_seed: u64,
    pub algorithm: Algorithm,
}

impl EstimatorConfig {
    pub fn new(k: usize, init_seed: u64, algorithm: Algorithm) -> Self {
        Self { k, init_seed, algorithm }
    }

    /// Rates may be zero (a no-op update); block sizes and growth ratios may not.
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |m: String| Err(EstimatorError::InvalidArgument(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        match &self.algorithm {
            Algorithm::Spca { c, n0 } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return bad(format!("spca c = {c} must be a nonnegative number"));
                }
                if !(n0.is_finite() && *n0 >= 0.0) {
                    return bad(format!("spca n0 = {n0} must be a nonnegative number"));
                }
            }
            Algorithm::Alecton { rate } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return bad(format!("alecton rate = {rate} must be a nonnegative number"));
                }
            }
            Algorithm::Dbpca(BlockSchedule::Geometric { gamma_sq, initial_block }) => {
                if !(*gamma_sq > 0.0 && *gamma_sq < 1.0) {
                    return bad(format!("dbpca gamma_sq = {gamma_sq} must lie in (0, 1)"));
                }
                if *initial_block == Some(0) {
                    return bad("dbpca initial_block must be positive".into());
                }
            }
            Algorithm::Dbpca(BlockSchedule::Theoretical(p)) => p.validate()?,
            Algorithm::Bpca { block } => {
                if *block == 0 {
                    return bad("bpca block must be positive".into());
                }
            }
        }
        Ok(())
    }
}
