//! Subspace error measures and the batch ground-truth oracle.
//!
//! For orthonormal `U` (true subspace) and `Q` (estimate), both `d x k`, the
//! spectral error is `sin^2` of the k-th principal angle,
//! `1 - sigma_min(U^T Q)^2`.

use log::warn;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{qr_decompose, smallest_singular_value, symmetric_eigen, DenseMatrix, LinalgError};
use crate::streams::{Dataset, PointRef, SyntheticModel};

/// Rounding slack below zero that is silently clamped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Oracle stops once successive iterates are this close in spectral error.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// Points per shard when applying a dataset covariance.
const SHARD: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("estimate is orthogonal to the reference subspace (infinite angle)")]
    InfiniteAngle,
    #[error("negative error {0} beyond rounding tolerance")]
    NegativeError(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// Top eigenvectors of a known covariance.
    Analytic,
    Oracle {
        iterations: usize,
        seed: u64,
        /// Iterations actually run before the stopping rule fired.
        used: usize,
        converged: bool,
    },
}

/// Ground-truth subspace with its eigenvalue estimates, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSubspace {
    u: DenseMatrix,
    eigvals: Vec<f64>,
    provenance: Provenance,
}

impl ReferenceSubspace {
    pub fn new(u: DenseMatrix, eigvals: Vec<f64>, provenance: Provenance) -> Result<Self, MetricError> {
        if u.cols() == 0 || u.cols() > u.rows() {
            return Err(MetricError::InvalidArgument(format!(
                "reference basis must be d x k with 1 <= k <= d, got {:?}",
                u.shape()
            )));
        }
        if eigvals.len() != u.cols() {
            return Err(MetricError::InvalidArgument("one eigenvalue per column expected".into()));
        }
        if !u.is_finite() || u.orthonormality_error() > 1e-8 {
            return Err(MetricError::InvalidArgument("reference basis is not orthonormal".into()));
        }
        Ok(Self { u, eigvals, provenance })
    }

    /// First `k` columns of the model's eigenbasis.
    pub fn analytic(model: &SyntheticModel, k: usize) -> Result<Self, MetricError> {
        let d = model.dim();
        if k == 0 || k > d {
            return Err(MetricError::InvalidArgument(format!("k = {k} outside 1..={d}")));
        }
        let v = model.basis();
        let u = DenseMatrix::from_column_major(d, k, v.as_slice()[..d * k].to_vec())?;
        Self::new(u, model.eigenvalues()[..k].to_vec(), Provenance::Analytic)
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn k(&self) -> usize {
        self.u.cols()
    }

    fn check(&self, q: &DenseMatrix) -> Result<(), MetricError> {
        if q.shape() != self.u.shape() {
            return Err(MetricError::InvalidArgument(format!(
                "estimate is {:?}, reference is {:?}",
                q.shape(),
                self.u.shape()
            )));
        }
        Ok(())
    }
}

fn clamp(value: f64) -> Result<f64, MetricError> {
    if value.is_nan() {
        return Err(MetricError::Linalg(LinalgError::NonFinite));
    }
    if value < -NEGATIVE_TOLERANCE {
        return Err(MetricError::NegativeError(value));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `1 - sigma_min(U^T Q)^2`, clamped to `[0, 1]`.
pub fn spectral_error(reference: &ReferenceSubspace, q: &DenseMatrix) -> Result<f64, MetricError> {
    reference.check(q)?;
    let m = reference.u.t_matmul(q)?;
    let s = smallest_singular_value(&m)?;
    clamp(1.0 - s * s)
}

/// Largest eigenvalue of `Q^T Q - (U^T Q)^T (U^T Q)`, i.e. `||U_perp^T Q||^2`.
pub fn residual_error(reference: &ReferenceSubspace, q: &DenseMatrix) -> Result<f64, MetricError> {
    reference.check(q)?;
    let m = reference.u.t_matmul(q)?;
    let mut g = q.t_matmul(q)?;
    let mtm = m.t_matmul(&m)?;
    for (a, b) in g.as_mut_slice().iter_mut().zip(mtm.as_slice()) {
        *a -= b;
    }
    let (values, _) = symmetric_eigen(&g)?;
    clamp(values[0])
}

/// Tangent of the k-th principal angle.
pub fn tan_error(reference: &ReferenceSubspace, q: &DenseMatrix) -> Result<f64, MetricError> {
    let phi = spectral_error(reference, q)?;
    if phi >= 1.0 {
        return Err(MetricError::InfiniteAngle);
    }
    Ok(phi.sqrt() / (1.0 - phi).sqrt())
}

/// Something that can apply a (PSD) covariance to a `d x k` block.
pub trait CovarianceOperator: Sync {
    fn dim(&self) -> usize;
    /// `A Q`.
    fn apply(&self, q: &DenseMatrix) -> Result<DenseMatrix, MetricError>;
}

impl CovarianceOperator for SyntheticModel {
    fn dim(&self) -> usize {
        SyntheticModel::dim(self)
    }

    fn apply(&self, q: &DenseMatrix) -> Result<DenseMatrix, MetricError> {
        let v = self.basis();
        let mut c = v.t_matmul(q)?;
        for (i, &l) in self.eigenvalues().iter().enumerate() {
            for j in 0..c.cols() {
                c[(i, j)] *= l;
            }
        }
        Ok(v.matmul(&c)?)
    }
}

fn accumulate<'a>(points: impl Iterator<Item = PointRef<'a>>, q: &DenseMatrix) -> DenseMatrix {
    let mut acc = DenseMatrix::zeros(q.rows(), q.cols());
    let mut w = vec![0.0; q.cols()];
    for x in points {
        x.project(q, &mut w);
        x.add_scaled_outer(&mut acc, 1.0, &w);
    }
    acc
}

fn merge_shards(parts: Vec<DenseMatrix>, rows: usize, cols: usize, n: usize) -> DenseMatrix {
    let mut total = DenseMatrix::zeros(rows, cols);
    for part in parts {
        for (t, p) in total.as_mut_slice().iter_mut().zip(part.as_slice()) {
            *t += p;
        }
    }
    total.scale(1.0 / n as f64);
    total
}

/// Empirical covariance `(1/N) sum x x^T` of a corpus.
impl CovarianceOperator for Dataset {
    fn dim(&self) -> usize {
        Dataset::dim(self)
    }

    fn apply(&self, q: &DenseMatrix) -> Result<DenseMatrix, MetricError> {
        check_operand(self.dim(), q)?;
        if self.is_empty() {
            return Err(MetricError::InvalidArgument("empty dataset has no covariance".into()));
        }
        let parts: Vec<DenseMatrix> = self
            .points()
            .par_chunks(SHARD)
            .map(|chunk| accumulate(chunk.iter().map(PointRef::Sparse), q))
            .collect();
        Ok(merge_shards(parts, q.rows(), q.cols(), self.len()))
    }
}

/// Empirical covariance of dense samples held as the columns of a matrix.
pub struct SampleColumns<'a>(pub &'a DenseMatrix);

impl CovarianceOperator for SampleColumns<'_> {
    fn dim(&self) -> usize {
        self.0.rows()
    }

    fn apply(&self, q: &DenseMatrix) -> Result<DenseMatrix, MetricError> {
        check_operand(self.dim(), q)?;
        let n = self.0.cols();
        if n == 0 {
            return Err(MetricError::InvalidArgument("no samples".into()));
        }
        let idx: Vec<usize> = (0..n).collect();
        let parts: Vec<DenseMatrix> = idx
            .par_chunks(SHARD)
            .map(|chunk| accumulate(chunk.iter().map(|&j| PointRef::Dense(self.0.col(j))), q))
            .collect();
        Ok(merge_shards(parts, q.rows(), q.cols(), n))
    }
}

fn check_operand(d: usize, q: &DenseMatrix) -> Result<(), MetricError> {
    if q.rows() != d {
        return Err(MetricError::InvalidArgument(format!(
            "operand has {} rows, operator dimension is {d}",
            q.rows()
        )));
    }
    Ok(())
}

/// Orthogonal iteration `U <- QR(A U)` from a seeded Gaussian start.
///
/// Stops early once the spectral error between successive iterates drops
/// below [`ORACLE_TOLERANCE`]; otherwise logs a warning after `iterations`
/// (a small eigengap) and returns the last iterate. Eigenvalues are the
/// Rayleigh-Ritz values of `U^T A U`, and `U` is rotated onto the Ritz vectors.
pub fn reference_oracle(
    op: &dyn CovarianceOperator,
    k: usize,
    iterations: usize,
    seed: u64,
) -> Result<ReferenceSubspace, MetricError> {
    let d = op.dim();
    if k == 0 || k > d {
        return Err(MetricError::InvalidArgument(format!("k = {k} outside 1..={d}")));
    }
    if iterations == 0 {
        return Err(MetricError::InvalidArgument("iterations must be at least 1".into()));
    }
    let mut rng = crate::linalg::RngState::new(seed);
    let (mut u, _) = qr_decompose(&crate::linalg::gaussian_matrix(d, k, &mut rng)?)?;
    let mut converged = false;
    let mut used = 0;
    while used < iterations {
        used += 1;
        let (next, _) = qr_decompose(&op.apply(&u)?)?;
        let prev = ReferenceSubspace::new(u, vec![0.0; k], Provenance::Analytic)?;
        let change = spectral_error(&prev, &next)?;
        u = next;
        if change < ORACLE_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "reference oracle did not converge in {iterations} iterations (k = {k}); \
             the eigengap at k may be zero"
        );
    }
    let au = op.apply(&u)?;
    let (eigvals, w) = symmetric_eigen(&u.t_matmul(&au)?)?;
    let u = u.matmul(&w)?;
    ReferenceSubspace::new(
        u,
        eigvals,
        Provenance::Oracle {
            iterations,
            seed,
            used,
            converged,
        },
    )
}
