//! Dense linear algebra used by the eigensolvers: a row-major matrix, thin QR, and
//! symmetric eigendecompositions.

mod jacobi;
mod matrix;
mod qr;
mod tridiagonal;

pub use jacobi::symmetric_evd_dense;
pub use matrix::DenseMatrix;
pub use qr::qr_thin;
pub use tridiagonal::symmetric_eigen_top;

use crate::error::{Error, Result};

/// Symmetry tolerance relative to `max |S_ij|`.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub(crate) fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if s.rows() != s.cols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asymmetry = s.asymmetry();
    if asymmetry > SYMMETRY_TOLERANCE * s.max_abs() {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Sorts eigenpairs by value (descending, stable) and flips each vector so that its
/// largest-magnitude entry is positive. `vector(i, c)` reads entry `i` of eigenvector `c`.
pub(crate) fn orient_and_sort(
    values: Vec<f64>,
    vector: impl Fn(usize, usize) -> f64,
    n: usize,
    count: usize,
) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(count);

    let mut vectors = DenseMatrix::zeros(n, count);
    for (c, &src) in order.iter().enumerate() {
        let mut pivot = 0.0_f64;
        for i in 0..n {
            let x = vector(i, src);
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, c)] = sign * vector(i, src);
        }
    }
    SymmetricEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
    }
}
