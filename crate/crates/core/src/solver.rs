//! Leading eigenpairs of the symmetric normalized kernel operator.
//!
//! Small problems use a dense symmetric eigensolver on the materialized operator. Large
//! problems use randomized subspace iteration, which only needs block applications of the
//! operator and therefore also works matrix-free.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{NormalizedOperator, OperatorKind};
use crate::linalg::{qr_thin, symmetric_eigen_top, symmetric_evd_dense, DenseMatrix};

/// `SolverMethod::Auto` picks the dense solver up to this many points.
pub const AUTO_DENSE_LIMIT: usize = 2000;
/// Largest operator the dense solver will accept.
pub const DENSE_SIZE_LIMIT: usize = 10_000;
/// Moves the leading eigenvalue 1 to 1 − 3 = −2, below the rest of the spectrum in [−1, 1].
const DEFLATION_SHIFT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    Dense,
    Randomized,
    Auto,
}

impl SolverMethod {
    /// Concrete method for an operator of size `m`.
    pub fn resolve(self, m: usize) -> SolverMethod {
        match self {
            SolverMethod::Auto if m <= AUTO_DENSE_LIMIT => SolverMethod::Dense,
            SolverMethod::Auto => SolverMethod::Randomized,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Number of eigenpairs `l` to return.
    pub eigenpairs: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
    pub method: SolverMethod,
}

impl SolverConfig {
    pub fn new(eigenpairs: usize) -> Self {
        Self {
            eigenpairs,
            oversampling: 10,
            power_iterations: 10,
            seed: 0,
            method: SolverMethod::Auto,
        }
    }
}

/// Leading eigenvalues (descending) with orthonormal eigenvector columns `U` (`m×l`).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
    /// `max_j ‖A u_j − λ_j u_j‖₂` measured when the basis was computed.
    pub residual: f64,
}

impl EigenBasis {
    /// Number of eigenpairs `l`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of points `m` (rows of `U`).
    pub fn points(&self) -> usize {
        self.vectors.rows()
    }

    /// Copy with every eigenvector scaled by its eigenvalue (`U ← UΣ`).
    pub fn weighted_by_eigenvalues(&self) -> EigenBasis {
        let mut vectors = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            vectors.scale_column(j, lambda);
        }
        EigenBasis {
            values: self.values.clone(),
            vectors,
            residual: self.residual,
        }
    }
}

fn require_symmetric(op: &NormalizedOperator<'_>) -> Result<()> {
    match op.kind() {
        OperatorKind::Symmetric => Ok(()),
        OperatorKind::RowStochastic => Err(Error::InvalidParameter(
            "eigensolvers require the symmetric normalization".into(),
        )),
    }
}

fn dense_operator<'a>(op: &'a NormalizedOperator<'_>) -> Result<&'a DenseMatrix> {
    require_symmetric(op)?;
    let m = op.dim();
    if m > DENSE_SIZE_LIMIT {
        return Err(Error::SizeGuard {
            size: m,
            limit: DENSE_SIZE_LIMIT,
        });
    }
    op.dense().ok_or(Error::RequiresDense)
}

/// Full eigendecomposition of a materialized operator (`l = m`).
pub fn evd_dense_full(op: &NormalizedOperator<'_>) -> Result<EigenBasis> {
    evd_dense_top(op, op.dim())
}

/// Exact leading `l` eigenpairs of a materialized operator.
pub fn evd_dense_top(op: &NormalizedOperator<'_>, l: usize) -> Result<EigenBasis> {
    let a = dense_operator(op)?;
    let m = op.dim();
    check_pairs(l, m)?;

    // A√d = √d exactly, so the leading pair is known. Shifting it to the bottom of the
    // spectrum keeps a tiny gap λ₁ − λ₂ from spoiling the remaining eigenvectors.
    let mut u1: Vec<f64> = op.graph().degrees().iter().map(|d| d.sqrt()).collect();
    let norm = u1.iter().map(|x| x * x).sum::<f64>().sqrt();
    u1.iter_mut().for_each(|x| *x /= norm);
    let mut shifted = a.clone();
    for i in 0..m {
        let row = shifted.row_mut(i);
        for (x, &uj) in row.iter_mut().zip(&u1) {
            *x -= DEFLATION_SHIFT * u1[i] * uj;
        }
    }

    let mut values = Vec::with_capacity(l);
    let mut vectors = DenseMatrix::zeros(m, l);
    values.push(1.0);
    for (i, &x) in u1.iter().enumerate() {
        vectors[(i, 0)] = x;
    }
    if l > 1 {
        let eig = symmetric_eigen_top(&shifted, l - 1)?;
        values.extend_from_slice(&eig.values);
        for i in 0..m {
            vectors.row_mut(i)[1..].copy_from_slice(eig.vectors.row(i));
        }
    }
    let mut basis = EigenBasis {
        values,
        vectors,
        residual: 0.0,
    };
    basis.residual = residual_check(op, &basis)?;
    Ok(basis)
}

fn check_pairs(l: usize, m: usize) -> Result<()> {
    if l == 0 || l > m {
        return Err(Error::InvalidParameter(format!(
            "number of eigenpairs must be in 1..={m}, got {l}"
        )));
    }
    Ok(())
}

/// `rows×cols` matrix of independent standard normal variates: ChaCha8 stream, Box–Muller,
/// filled row-major.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || ((rng.next_u64() >> 11) as f64) * SCALE;
    let n = rows * cols;
    let mut data = Vec::with_capacity(n + 1);
    while data.len() < n {
        let u1 = 1.0 - uniform();
        let u2 = uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        data.push(radius * angle.cos());
        data.push(radius * angle.sin());
    }
    data.truncate(n);
    DenseMatrix::from_parts(rows, cols, data)
}

/// `−1` for columns whose largest-magnitude entry is negative, `+1` otherwise.
fn orientation_signs(u: &DenseMatrix) -> Vec<f64> {
    (0..u.cols())
        .map(|j| {
            let mut pivot = 0.0_f64;
            for i in 0..u.rows() {
                let x = u[(i, j)];
                if x.abs() > pivot.abs() {
                    pivot = x;
                }
            }
            if pivot < 0.0 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

/// Top-`l` eigenpairs by randomized subspace iteration with `p` oversampling columns and
/// `q` power iterations.
pub fn evd_randomized(op: &NormalizedOperator<'_>, cfg: &SolverConfig) -> Result<EigenBasis> {
    require_symmetric(op)?;
    let m = op.dim();
    let l = cfg.eigenpairs;
    check_pairs(l, m)?;
    let width = l + cfg.oversampling;
    if width > m {
        return Err(Error::InvalidParameter(format!(
            "eigenpairs + oversampling = {width} exceeds problem size {m}"
        )));
    }

    let omega = gaussian_matrix(m, width, cfg.seed);
    let mut y = op.apply_block(&omega)?;
    for _ in 0..cfg.power_iterations {
        let (q, _) = qr_thin(&y)?;
        y = op.apply_block(&q)?;
    }
    let (q, _) = qr_thin(&y)?;
    let aq = op.apply_block(&q)?;
    let mut b = q.t_matmul(&aq)?;
    for i in 0..width {
        for j in (i + 1)..width {
            let avg = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = avg;
            b[(j, i)] = avg;
        }
    }
    let small = symmetric_evd_dense(&b)?;
    let w = small.vectors.leading_columns(l);
    let mut vectors = q.matmul(&w)?;
    let values = small.values[..l].to_vec();

    // A·U = (A·Q)·W reuses the last operator application.
    let mut au = aq.matmul(&w)?;
    for (j, sign) in orientation_signs(&vectors).into_iter().enumerate() {
        if sign < 0.0 {
            vectors.scale_column(j, -1.0);
            au.scale_column(j, -1.0);
        }
    }
    let residual = column_residual(&au, &vectors, &values);
    Ok(EigenBasis {
        values,
        vectors,
        residual,
    })
}

fn column_residual(au: &DenseMatrix, u: &DenseMatrix, values: &[f64]) -> f64 {
    let mut norms = vec![0.0; values.len()];
    for i in 0..u.rows() {
        for (j, (&a, &x)) in au.row(i).iter().zip(u.row(i)).enumerate() {
            let r = a - values[j] * x;
            norms[j] += r * r;
        }
    }
    norms.into_iter().map(f64::sqrt).fold(0.0, f64::max)
}

/// `max_j ‖A u_j − λ_j u_j‖₂`, with `A u_j` from a fresh operator application.
pub fn residual_check(op: &NormalizedOperator<'_>, basis: &EigenBasis) -> Result<f64> {
    if basis.points() != op.dim() || basis.vectors.cols() != basis.values.len() {
        return Err(Error::Dimension(format!(
            "basis of {} points and {} values does not match operator of size {}",
            basis.points(),
            basis.values.len(),
            op.dim()
        )));
    }
    let au = op.apply_block(&basis.vectors)?;
    Ok(column_residual(&au, &basis.vectors, &basis.values))
}

/// Leading `cfg.eigenpairs` eigenpairs by the configured (or automatically chosen) method.
pub fn solve(op: &NormalizedOperator<'_>, cfg: &SolverConfig) -> Result<EigenBasis> {
    match cfg.method.resolve(op.dim()) {
        SolverMethod::Dense => evd_dense_top(op, cfg.eigenpairs),
        _ => evd_randomized(op, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{
        build_gaussian_kernel, normalize_row_stochastic, normalize_symmetric, Bandwidth,
        KernelConfig, KernelGraph, KernelMode,
    };

    fn graph(m: usize, seed: u64, mode: KernelMode) -> KernelGraph {
        let x = gaussian_matrix(m, 2, seed);
        build_gaussian_kernel(
            &x,
            &KernelConfig {
                bandwidth: Bandwidth::MedianHeuristic,
                mode,
                seed: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_kernel() {
        // K = [[1, c], [c, 1]] has A = K / (1 + c): eigenvalues 1 and (1 − c)/(1 + c).
        let c = 0.25;
        let g =
            KernelGraph::from_kernel_matrix(DenseMatrix::from_rows(&[[1.0, c], [c, 1.0]]).unwrap())
                .unwrap();
        let op = normalize_symmetric(&g).unwrap();
        let b = evd_dense_full(&op).unwrap();
        assert!((b.values[0] - 1.0).abs() < 1e-15);
        assert!((b.values[1] - (1.0 - c) / (1.0 + c)).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.vectors[(0, 0)] - h).abs() < 1e-15 && (b.vectors[(1, 0)] - h).abs() < 1e-15);
        assert!((b.vectors[(0, 1)].abs() - h).abs() < 1e-15);
        assert!(b.vectors[(0, 1)] * b.vectors[(1, 1)] < 0.0);
        assert!(b.residual < 1e-14);
    }

    #[test]
    fn gaussian_matrix_is_seeded() {
        let a = gaussian_matrix(7, 3, 11);
        assert_eq!(a, gaussian_matrix(7, 3, 11));
        assert_ne!(a, gaussian_matrix(7, 3, 12));
        let big = gaussian_matrix(200, 50, 1);
        let n = big.as_slice().len() as f64;
        let mean = big.as_slice().iter().sum::<f64>() / n;
        let var = big
            .as_slice()
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!(
            mean.abs() < 0.05 && (var - 1.0).abs() < 0.05,
            "{mean} {var}"
        );
    }

    #[test]
    fn randomized_matches_dense() {
        let g = graph(300, 3, KernelMode::Dense);
        let op = normalize_symmetric(&g).unwrap();
        let exact = evd_dense_top(&op, 15).unwrap();
        let mut cfg = SolverConfig::new(15);
        cfg.method = SolverMethod::Randomized;
        let approx = evd_randomized(&op, &cfg).unwrap();
        for (a, b) in exact.values.iter().zip(&approx.values) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(approx.residual < 1e-6);
        assert_eq!(approx, evd_randomized(&op, &cfg).unwrap());
    }

    #[test]
    fn matrix_free_randomized_matches_dense_kernel() {
        let mut cfg = SolverConfig::new(5);
        cfg.method = SolverMethod::Randomized;
        let gd = graph(120, 4, KernelMode::Dense);
        let gf = graph(120, 4, KernelMode::MatrixFree);
        let a = evd_randomized(&normalize_symmetric(&gd).unwrap(), &cfg).unwrap();
        let b = evd_randomized(&normalize_symmetric(&gf).unwrap(), &cfg).unwrap();
        for (x, y) in a.vectors.as_slice().iter().zip(b.vectors.as_slice()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn guards() {
        let g = graph(30, 1, KernelMode::Dense);
        let op = normalize_symmetric(&g).unwrap();
        assert!(evd_dense_top(&op, 0).is_err());
        assert!(evd_dense_top(&op, 31).is_err());
        let mut cfg = SolverConfig::new(25);
        cfg.method = SolverMethod::Randomized;
        assert!(matches!(
            evd_randomized(&op, &cfg),
            Err(Error::InvalidParameter(_))
        ));
        let p = normalize_row_stochastic(&g).unwrap();
        assert!(evd_dense_top(&p, 3).is_err());
        let gf = graph(30, 1, KernelMode::MatrixFree);
        let opf = normalize_symmetric(&gf).unwrap();
        assert!(matches!(evd_dense_top(&opf, 3), Err(Error::RequiresDense)));
        assert_eq!(SolverMethod::Auto.resolve(2000), SolverMethod::Dense);
        assert_eq!(SolverMethod::Auto.resolve(2001), SolverMethod::Randomized);
    }

    #[test]
    fn weighting_scales_columns() {
        let g = graph(20, 2, KernelMode::Dense);
        let b = evd_dense_top(&normalize_symmetric(&g).unwrap(), 4).unwrap();
        let w = b.weighted_by_eigenvalues();
        for i in 0..20 {
            for j in 0..4 {
                assert_eq!(w.vectors[(i, j)], b.vectors[(i, j)] * b.values[j]);
            }
        }
    }
}
