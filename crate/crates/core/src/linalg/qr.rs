//! Thin Householder QR for tall-skinny matrices.

use super::matrix::{dot, norm};
use super::{DenseMatrix, LinalgError};

/// Relative threshold below which a diagonal entry of `R` marks the column as
/// linearly dependent on the ones before it.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Thin QR decomposition `M = Q R`.
///
/// `Q` is `rows x cols` with orthonormal columns and `R` is `cols x cols` upper
/// triangular with a nonnegative diagonal, which makes the factorization unique.
pub fn qr_decompose(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix), LinalgError> {
    let mut work = m.clone();
    let mut q = DenseMatrix::zeros(m.rows(), m.cols());
    let r = householder_qr_into(&mut work, &mut q)?;
    Ok((q, r))
}

/// In-place variant used on the estimator hot path.
///
/// `a` is overwritten with the Householder vectors; `q` receives the thin
/// orthonormal factor and is left untouched when an error is returned. No
/// `rows x cols` scratch beyond these two buffers is allocated.
pub fn householder_qr_into(a: &mut DenseMatrix, q: &mut DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(LinalgError::InvalidArgument(format!(
            "qr_decompose needs rows >= cols >= 1, got {m}x{n}"
        )));
    }
    if q.shape() != (m, n) {
        return Err(LinalgError::DimensionMismatch {
            op: "householder_qr_into",
            left: a.shape(),
            right: q.shape(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let column_norms: Vec<f64> = (0..n).map(|j| norm(a.col(j))).collect();
    let mut r = DenseMatrix::zeros(n, n);
    // beta_j of H_j = I - beta_j v_j v_j^T, with v_j stored in a[j.., j].
    let mut betas = vec![0.0; n];

    for j in 0..n {
        let x = &a.col(j)[j..];
        let alpha = norm(x);
        if !(alpha > RANK_TOLERANCE * column_norms[j]) {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let x0 = x[0];
        let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
        // v = x + sign(x0) * alpha * e1, so v^T v = 2 alpha (alpha + |x0|).
        a[(j, j)] = x0 + sign * alpha;
        let beta = 1.0 / (alpha * (alpha + x0.abs()));
        betas[j] = beta;
        r[(j, j)] = -sign * alpha;

        for c in j + 1..n {
            let (head, tail) = a.as_mut_slice().split_at_mut(c * m);
            let v = &head[j * m + j..(j + 1) * m];
            let target = &mut tail[j..m];
            let s = beta * dot(v, target);
            for (t, vi) in target.iter_mut().zip(v) {
                *t -= s * vi;
            }
            r[(j, c)] = target[0];
        }
    }

    // Backward accumulation of Q = H_0 ... H_{n-1} [I_n; 0].
    q.fill(0.0);
    for i in 0..n {
        q[(i, i)] = 1.0;
    }
    for j in (0..n).rev() {
        let v = &a.col(j)[j..];
        for c in j..n {
            let target = &mut q.col_mut(c)[j..];
            let s = betas[j] * dot(v, target);
            for (t, vi) in target.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
            q.col_mut(j).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(r)
}
