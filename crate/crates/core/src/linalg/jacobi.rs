//! Jacobi routines for the small (`k x k`-sized) problems the metrics need.

use super::matrix::dot;
use super::{DenseMatrix, LinalgError};

/// Largest `min(rows, cols)` accepted by the small-matrix routines.
pub const SMALL_LIMIT: usize = 64;

const MAX_SWEEPS: usize = 80;

/// All singular values of `m`, descending.
///
/// One-sided (Hestenes) Jacobi: plane rotations orthogonalize the columns of
/// a working copy, which diagonalizes `M^T M` implicitly; the singular values
/// are then the column norms. Wide inputs are transposed first.
pub fn singular_values_small(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let mut w = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let n = w.cols();
    if n == 0 {
        return Err(LinalgError::InvalidArgument("empty matrix".into()));
    }
    if n > SMALL_LIMIT {
        return Err(LinalgError::InvalidArgument(format!(
            "singular_values_small handles min(rows, cols) <= {SMALL_LIMIT}, got {n}"
        )));
    }
    if !w.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let rows = w.rows();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let data = w.as_mut_slice();
                for i in 0..rows {
                    let wp = data[p * rows + i];
                    let wq = data[q * rows + i];
                    data[p * rows + i] = c * wp - s * wq;
                    data[q * rows + i] = s * wp + c * wq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn smallest_singular_value(m: &DenseMatrix) -> Result<f64, LinalgError> {
    Ok(*singular_values_small(m)?.last().expect("nonempty by construction"))
}

/// Eigen-decomposition of a small symmetric matrix by cyclic two-sided Jacobi.
///
/// Returns eigenvalues in descending order with the matching unit eigenvectors
/// as columns. Only the upper triangle is read.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    let n = m.rows();
    if n != m.cols() || n == 0 {
        return Err(LinalgError::InvalidArgument(format!(
            "symmetric_eigen needs a nonempty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if n > SMALL_LIMIT {
        return Err(LinalgError::InvalidArgument(format!(
            "symmetric_eigen handles n <= {SMALL_LIMIT}, got {n}"
        )));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let mut a = m.clone();
    for j in 0..n {
        for i in j + 1..n {
            a[(i, j)] = a[(j, i)];
        }
    }
    let mut v = DenseMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum::<f64>() + off;
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let columns: Vec<Vec<f64>> = order.iter().map(|&i| v.col(i).to_vec()).collect();
    Ok((values, DenseMatrix::from_columns(&columns)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, qr_decompose, RngState};
    use proptest::prelude::*;

    fn diag(values: &[f64]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[test]
    fn diagonal_inputs() {
        assert_eq!(singular_values_small(&diag(&[0.9, 0.3])).unwrap(), vec![0.9, 0.3]);
        assert_eq!(singular_values_small(&diag(&[0.3, -0.9])).unwrap(), vec![0.9, 0.3]);
        assert_eq!(singular_values_small(&DenseMatrix::identity(3)).unwrap(), vec![1.0; 3]);
        assert_eq!(smallest_singular_value(&diag(&[2.0, 0.5])).unwrap(), 0.5);
        assert_eq!(smallest_singular_value(&DenseMatrix::identity(4)).unwrap(), 1.0);
    }

    #[test]
    fn smallest_is_tail_of_full_list() {
        let m = gaussian_matrix(4, 4, &mut RngState::new(5)).unwrap();
        let all = singular_values_small(&m).unwrap();
        assert_eq!(smallest_singular_value(&m).unwrap(), all[3]);
    }

    #[test]
    fn rejects_oversized_input() {
        let m = DenseMatrix::zeros(70, 65);
        assert!(matches!(singular_values_small(&m), Err(LinalgError::InvalidArgument(_))));
        assert!(singular_values_small(&DenseMatrix::zeros(200, 64)).is_ok());
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let g = gaussian_matrix(5, 5, &mut RngState::new(9)).unwrap();
        let s = g.t_matmul(&g).unwrap();
        let (values, vectors) = symmetric_eigen(&s).unwrap();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        assert!(vectors.orthonormality_error() < 1e-12);
        let sv = s.matmul(&vectors).unwrap();
        for (j, &lambda) in values.iter().enumerate() {
            for i in 0..5 {
                assert!((sv[(i, j)] - lambda * vectors[(i, j)]).abs() < 1e-10 * values[0]);
            }
        }
        // singular values of g are the square roots of the eigenvalues of g^T g
        let svals = singular_values_small(&g).unwrap();
        for (a, b) in svals.iter().zip(&values) {
            assert!((a * a - b).abs() < 1e-10 * values[0]);
        }
    }

    proptest! {
        #[test]
        fn transpose_has_same_singular_values(seed in any::<u64>(), r in 1usize..12, c in 1usize..12) {
            let (tall, wide) = (r.max(c), r.min(c));
            let m = gaussian_matrix(tall, wide, &mut RngState::new(seed)).unwrap();
            let a = singular_values_small(&m).unwrap();
            let b = singular_values_small(&m.transpose()).unwrap();
            let scale = a[0];
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn orthonormal_columns_have_unit_singular_values(seed in any::<u64>(), k in 1usize..=8, extra in 0usize..20) {
            let g = gaussian_matrix(k + extra, k, &mut RngState::new(seed)).unwrap();
            let (q, _) = qr_decompose(&g).unwrap();
            for s in singular_values_small(&q).unwrap() {
                prop_assert!((s - 1.0).abs() <= 1e-9);
            }
        }
    }
}
