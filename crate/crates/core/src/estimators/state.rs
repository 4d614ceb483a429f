use super::schedule::{next_geometric_block, theoretical_block_size};
use super::{Algorithm, BlockSchedule, EstimatorConfig, EstimatorError};
use crate::linalg::{gaussian_matrix, householder_qr_into, qr_decompose, DenseMatrix, LinalgError, RngState};
use crate::streams::PointRef;

#[derive(Clone, Debug)]
struct BlockProgress {
    /// 1-based index of the block being filled.
    index: u64,
    fill: u64,
    size: u64,
}

/// Streaming estimate of the top-`k` principal subspace.
///
/// Holds the orthonormal `d x k` basis `Q` and one `d x k` scratch matrix; the
/// scratch is `S_n` for the gradient methods and the block accumulator for the
/// block methods. Block methods only replace `Q` at block boundaries.
#[derive(Clone, Debug)]
pub struct StreamingPca {
    config: EstimatorConfig,
    q: DenseMatrix,
    work: DenseMatrix,
    projection: Vec<f64>,
    seen: u64,
    block: Option<BlockProgress>,
}

impl StreamingPca {
    /// Starts from the Q factor of a Gaussian `d x k` matrix drawn with `init_seed`.
    pub fn init(config: EstimatorConfig, d: usize) -> Result<Self, EstimatorError> {
        config.validate()?;
        if d < config.k {
            return Err(EstimatorError::InvalidArgument(format!(
                "dimension {d} is smaller than k = {}",
                config.k
            )));
        }
        let mut rng = RngState::new(config.init_seed);
        let s0 = gaussian_matrix(d, config.k, &mut rng)?;
        let (q0, _) = qr_decompose(&s0)?;
        Self::with_initial_basis(config, q0)
    }

    /// Starts from a caller-supplied orthonormal basis.
    pub fn with_initial_basis(config: EstimatorConfig, q0: DenseMatrix) -> Result<Self, EstimatorError> {
        config.validate()?;
        if q0.cols() != config.k || q0.rows() < config.k {
            return Err(EstimatorError::InvalidArgument(format!(
                "initial basis is {}x{}, expected d x {} with d >= k",
                q0.rows(),
                q0.cols(),
                config.k
            )));
        }
        if !q0.is_finite() || q0.orthonormality_error() > 1e-8 {
            return Err(EstimatorError::InvalidArgument(
                "initial basis must have orthonormal columns".into(),
            ));
        }
        let block = match &config.algorithm {
            Algorithm::Spca { .. } | Algorithm::Alecton { .. } => None,
            Algorithm::Dbpca(BlockSchedule::Geometric { initial_block, .. }) => Some(BlockProgress {
                index: 1,
                fill: 0,
                size: initial_block.unwrap_or(2 * config.k as u64),
            }),
            Algorithm::Dbpca(BlockSchedule::Theoretical(p)) => Some(BlockProgress {
                index: 1,
                fill: 0,
                size: theoretical_block_size(1, p)?,
            }),
            Algorithm::Bpca { block } => Some(BlockProgress {
                index: 1,
                fill: 0,
                size: *block,
            }),
        };
        let (d, k) = q0.shape();
        Ok(Self {
            config,
            q: q0,
            work: DenseMatrix::zeros(d, k),
            projection: vec![0.0; k],
            seen: 0,
            block,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn k(&self) -> usize {
        self.q.cols()
    }

    /// Points consumed so far.
    pub fn samples_seen(&self) -> u64 {
        self.seen
    }

    /// Current orthonormal estimate; for block methods, as of the last completed block.
    pub fn basis(&self) -> &DenseMatrix {
        &self.q
    }

    /// 1-based index of the block currently being filled (block methods only).
    pub fn block_index(&self) -> Option<u64> {
        self.block.as_ref().map(|b| b.index)
    }

    pub fn current_block_size(&self) -> Option<u64> {
        self.block.as_ref().map(|b| b.size)
    }

    /// Points already accumulated into the current block.
    pub fn block_fill(&self) -> Option<u64> {
        self.block.as_ref().map(|b| b.fill)
    }

    /// Step size the gradient methods apply to the `n`-th point (1-based).
    pub fn learning_rate(&self, n: u64) -> Option<f64> {
        match self.config.algorithm {
            Algorithm::Spca { c, n0 } => Some(c / (n0 + n as f64)),
            Algorithm::Alecton { rate } => Some(rate),
            _ => None,
        }
    }

    /// Consumes one point. The point must have dimension `d` and norm at most 1.
    pub fn update(&mut self, x: PointRef<'_>) -> Result<(), EstimatorError> {
        if let PointRef::Dense(v) = x {
            if v.len() != self.dim() {
                return Err(EstimatorError::InvalidArgument(format!(
                    "point has dimension {}, estimator expects {}",
                    v.len(),
                    self.dim()
                )));
            }
        }
        self.seen += 1;
        x.project(&self.q, &mut self.projection);
        match self.block.is_some() {
            false => self.gradient_step(x),
            true => self.block_step(x),
        }
    }

    fn gradient_step(&mut self, x: PointRef<'_>) -> Result<(), EstimatorError> {
        let rate = self.learning_rate(self.seen).expect("gradient method");
        if rate == 0.0 || self.projection.iter().all(|&w| w == 0.0) {
            // S = Q exactly, whose QR factor is Q itself.
            return Ok(());
        }
        self.work.copy_from(&self.q);
        x.add_scaled_outer(&mut self.work, rate, &self.projection);
        match householder_qr_into(&mut self.work, &mut self.q) {
            Ok(_) => Ok(()),
            Err(LinalgError::RankDeficient { column }) => Err(EstimatorError::RankDeficient {
                step: self.seen,
                column,
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn block_step(&mut self, x: PointRef<'_>) -> Result<(), EstimatorError> {
        let progress = self.block.as_mut().expect("block method");
        x.add_scaled_outer(&mut self.work, 1.0 / progress.size as f64, &self.projection);
        progress.fill += 1;
        if progress.fill < progress.size {
            return Ok(());
        }

        let index = progress.index;
        match householder_qr_into(&mut self.work, &mut self.q) {
            Ok(_) => {}
            Err(LinalgError::RankDeficient { column }) => {
                return Err(EstimatorError::DegenerateBlock {
                    block_index: index,
                    column,
                })
            }
            Err(e) => return Err(e.into()),
        }
        self.work.fill(0.0);
        let next = match &self.config.algorithm {
            Algorithm::Dbpca(BlockSchedule::Geometric { gamma_sq, .. }) => {
                next_geometric_block(progress.size, *gamma_sq)
            }
            Algorithm::Dbpca(BlockSchedule::Theoretical(p)) => theoretical_block_size(index + 1, p)?,
            Algorithm::Bpca { block } => *block,
            _ => unreachable!("gradient methods have no block state"),
        };
        progress.index += 1;
        progress.fill = 0;
        progress.size = next;
        Ok(())
    }
}
