use super::{check_symmetric, orient_and_sort, DenseMatrix, SymmetricEigen};
use crate::error::Result;

/// Sweeps stop once `off(S) <= CONVERGENCE * ‖S‖_F`.
const CONVERGENCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
///
/// Values come back in descending order; each eigenvector column is oriented so its
/// largest-magnitude entry is positive.
pub fn symmetric_evd_dense(s: &DenseMatrix) -> Result<SymmetricEigen> {
    check_symmetric(s)?;
    let n = s.rows();
    // Work on the exactly symmetric part so rotations see a consistent matrix.
    let mut a = s.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let target = CONVERGENCE * a.frobenius_norm();
    let mut v = DenseMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate_columns(&mut a, p, q, c, sn);
                rotate_rows(&mut a, p, q, c, sn);
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                rotate_columns(&mut v, p, q, c, sn);
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    Ok(orient_and_sort(values, |i, c| v[(i, c)], n, n))
}

fn rotate_columns(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.rows() {
        let row = m.row_mut(k);
        let (xp, xq) = (row[p], row[q]);
        row[p] = c * xp - s * xq;
        row[q] = s * xp + c * xq;
    }
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    for k in 0..cols {
        let (xp, xq) = (data[p * cols + k], data[q * cols + k]);
        data[p * cols + k] = c * xp - s * xq;
        data[q * cols + k] = s * xp + c * xq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = symmetric_evd_dense(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0]);
        let g = eig.vectors.t_matmul(&eig.vectors).unwrap();
        assert_eq!(g, DenseMatrix::identity(2));
    }

    #[test]
    fn analytic_two_by_two() {
        let s = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let eig = symmetric_evd_dense(&s).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eig.vectors[(0, 0)].abs() - h).abs() < 1e-14);
        assert!((eig.vectors[(0, 0)] - eig.vectors[(1, 0)]).abs() < 1e-14);
        assert!((eig.vectors[(0, 1)] + eig.vectors[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let s = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_evd_dense(&s),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let eig = symmetric_evd_dense(&DenseMatrix::zeros(3, 3)).unwrap();
        assert_eq!(eig.values, vec![0.0; 3]);
    }
}
