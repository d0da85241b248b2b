use super::DenseMatrix;
use crate::error::{Error, Result};

/// Columns whose remaining norm falls below this fraction of `max |M_ij|` are treated as
/// numerically zero; the factorization then keeps the unreflected basis direction.
const RANK_TOLERANCE: f64 = 1e-12;

struct Reflector {
    /// Householder vector restricted to rows `j..m`, scaled so `v[0] = 1`.
    v: Vec<f64>,
    tau: f64,
}

/// Applies `I − τ v vᵀ` to rows `start..` and columns `col_from..` of `a`.
fn reflect(a: &mut DenseMatrix, start: usize, col_from: usize, r: &Reflector) {
    let cols = a.cols();
    let mut w = vec![0.0; cols - col_from];
    for (offset, &vi) in r.v.iter().enumerate() {
        let row = &a.row(start + offset)[col_from..];
        for (wc, &x) in w.iter_mut().zip(row) {
            *wc += vi * x;
        }
    }
    for (offset, &vi) in r.v.iter().enumerate() {
        let scale = r.tau * vi;
        let row = &mut a.row_mut(start + offset)[col_from..];
        for (x, &wc) in row.iter_mut().zip(&w) {
            *x -= scale * wc;
        }
    }
}

/// Thin QR factorization `M = QR` of a tall matrix by Householder reflections.
///
/// `Q` is `m×l` with orthonormal columns and `R` is `l×l` upper triangular with a
/// nonnegative diagonal. Near-rank-deficient columns do not fail: their `Q` column is
/// the corresponding accumulated unit direction, which stays orthogonal to the others.
pub fn qr_thin(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::Dimension(format!(
            "thin QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let threshold = RANK_TOLERANCE * m.max_abs();
    let mut a = m.clone();
    let mut reflectors: Vec<Option<Reflector>> = Vec::with_capacity(cols);

    for j in 0..cols {
        let alpha = a[(j, j)];
        let tail: f64 = ((j + 1)..rows).map(|i| a[(i, j)] * a[(i, j)]).sum();
        let norm = (alpha * alpha + tail).sqrt();
        if tail == 0.0 || norm <= threshold {
            for i in (j + 1)..rows {
                a[(i, j)] = 0.0;
            }
            reflectors.push(None);
            continue;
        }
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let pivot = alpha - beta;
        let mut v = Vec::with_capacity(rows - j);
        v.push(1.0);
        v.extend(((j + 1)..rows).map(|i| a[(i, j)] / pivot));
        let reflector = Reflector {
            v,
            tau: (beta - alpha) / beta,
        };
        if j + 1 < cols {
            reflect(&mut a, j, j + 1, &reflector);
        }
        a[(j, j)] = beta;
        for i in (j + 1)..rows {
            a[(i, j)] = 0.0;
        }
        reflectors.push(Some(reflector));
    }

    let mut r = DenseMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            r[(i, j)] = a[(i, j)];
        }
    }

    let mut q = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        q[(j, j)] = 1.0;
    }
    for (j, reflector) in reflectors.iter().enumerate().rev() {
        if let Some(reflector) = reflector {
            reflect(&mut q, j, j, reflector);
        }
    }

    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.scale_column(j, -1.0);
            for c in j..cols {
                r[(j, c)] = -r[(j, c)];
            }
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(q: &DenseMatrix) -> f64 {
        let g = q.t_matmul(q).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    fn reconstruction_error(m: &DenseMatrix, q: &DenseMatrix, r: &DenseMatrix) -> f64 {
        let qr = q.matmul(r).unwrap();
        qr.as_slice()
            .iter()
            .zip(m.as_slice())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    #[test]
    fn identity_factors_to_identity() {
        let (q, r) = qr_thin(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(q, DenseMatrix::identity(3));
        assert_eq!(r, DenseMatrix::identity(3));
    }

    #[test]
    fn single_column_is_normalized() {
        let m = DenseMatrix::column_vector(&[3.0, 4.0]).unwrap();
        let (q, r) = qr_thin(&m).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_tall_matrix_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = DenseMatrix::from_row_major(20, 5, data).unwrap();
        let (q, r) = qr_thin(&m).unwrap();
        assert!(orthonormality_error(&q) <= 1e-10);
        assert!(reconstruction_error(&m, &q, &r) <= 1e-10 * m.max_abs());
        for i in 0..5 {
            assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn rank_deficient_input_keeps_orthonormal_q() {
        // Third column duplicates the first; fourth is zero.
        let rows: Vec<[f64; 4]> = (0..6)
            .map(|i| {
                let x = i as f64;
                [x + 1.0, x * x - 2.0, x + 1.0, 0.0]
            })
            .collect();
        let m = DenseMatrix::from_rows(&rows).unwrap();
        let (q, r) = qr_thin(&m).unwrap();
        assert!(orthonormality_error(&q) <= 1e-10);
        assert!(reconstruction_error(&m, &q, &r) <= 1e-10 * m.max_abs());
    }

    #[test]
    fn zero_matrix_is_total() {
        let (q, r) = qr_thin(&DenseMatrix::zeros(4, 2)).unwrap();
        assert!(orthonormality_error(&q) <= 1e-15);
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn wide_input_is_rejected() {
        assert!(matches!(
            qr_thin(&DenseMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
