//! Cyclic Jacobi eigendecomposition of real symmetric matrices.

use thiserror::Error;

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is empty")]
    Empty,
}

/// Eigenpairs sorted by descending eigenvalue; `vectors[i][j]` is entry `i` of eigenvector `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i][j] * a[i][j];
            }
        }
    }
    sum.sqrt()
}

/// Diagonalizes `matrix` by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm is below
/// `JACOBI_TOLERANCE · max(1, ‖A‖_F)` or after `JACOBI_MAX_SWEEPS` sweeps.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> Result<SymmetricEigen, LinalgError> {
    let n = matrix.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        for j in 0..i {
            let scale = row[j].abs().max(matrix[j][i].abs()).max(1.0);
            if (row[j] - matrix[j][i]).abs() > 1e-12 * scale {
                return Err(LinalgError::NotSymmetric(i, j));
            }
        }
    }

    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let frobenius = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * frobenius.max(1.0);

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_diagonal_norm(&a) >= threshold {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A ← Jᵀ A J with J the (p, q) plane rotation
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| a[i][i]).collect(),
        vectors: (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect(),
        sweeps,
    })
}
