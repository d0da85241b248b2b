//! Gaussian kernel graph over the rows of a data matrix and its two normalizations,
//! `A = D^{-1/2} K D^{-1/2}` and `P = D^{-1} K`.
//!
//! A graph is either dense (K materialized) or matrix-free, in which case only the data,
//! the bandwidth and the degree vector are stored and kernel rows are recomputed on every
//! operator application.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Above this many points the median heuristic samples pairs instead of enumerating them.
pub const MEDIAN_EXACT_LIMIT: usize = 2000;
/// Number of sampled pairs used by the median heuristic on large inputs.
pub const MEDIAN_SAMPLE_PAIRS: usize = 2000;
/// Matrix-free products handle this many rows per task...
const ROW_BLOCK: usize = 16;
/// ...against this many kernel columns at a time.
const COLUMN_TILE: usize = 512;

/// Largest integer squared distance served from a precomputed exponential table.
const EXP_TABLE_LIMIT: f64 = (1u64 << 22) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// Explicit ε in `exp(−‖x − y‖² / ε)`.
    Fixed(f64),
    /// ε = median squared pairwise distance.
    MedianHeuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    Dense,
    MatrixFree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
    pub mode: KernelMode,
    /// Seed for pair sampling when the median heuristic runs on more than
    /// [`MEDIAN_EXACT_LIMIT`] points.
    pub seed: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::MedianHeuristic,
            mode: KernelMode::Dense,
            seed: 0,
        }
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn gaussian(sq_dist: f64, epsilon: f64) -> f64 {
    (-sq_dist / epsilon).exp()
}

fn median_of(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Median of the squared pairwise distances between distinct rows (the average of the two
/// middle values for an even count). Exact up to [`MEDIAN_EXACT_LIMIT`] rows, otherwise
/// estimated from [`MEDIAN_SAMPLE_PAIRS`] pairs drawn with `seed`.
pub fn median_squared_distance(x: &DenseMatrix, seed: u64) -> f64 {
    let m = x.rows();
    let mut dists = if m <= MEDIAN_EXACT_LIMIT {
        let mut d = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                d.push(squared_distance(x.row(i), x.row(j)));
            }
        }
        d
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..MEDIAN_SAMPLE_PAIRS)
            .map(|_| {
                let i = rng.random_range(0..m);
                let mut j = rng.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                squared_distance(x.row(i), x.row(j))
            })
            .collect()
    };
    median_of(&mut dists)
}

/// `exp(−t/ε)` for every integer `t` up to the largest possible squared distance, used when
/// the data are integer valued (image patches). Entries equal the direct evaluation bitwise.
/// Distances are then taken over a column-major `f32` copy of the data. The bound on the
/// largest squared distance (≤ 2^22) keeps every difference, square and partial sum an
/// exactly representable integer, so they equal the `f64` distances.
#[derive(Clone, Debug)]
struct ExpTable {
    values: Vec<f64>,
    columns: Vec<Vec<f32>>,
}

impl ExpTable {
    fn for_data(x: &DenseMatrix, epsilon: f64) -> Option<Self> {
        if !x
            .as_slice()
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() < 1e6)
        {
            return None;
        }
        let mut bound = 0.0;
        for c in 0..x.cols() {
            let col = x.column(c);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            bound += (hi - lo) * (hi - lo);
        }
        if bound > EXP_TABLE_LIMIT {
            return None;
        }
        let len = bound as usize + 1;
        Some(Self {
            values: (0..len).map(|t| gaussian(t as f64, epsilon)).collect(),
            columns: (0..x.cols())
                .map(|c| x.column(c).iter().map(|&v| v as f32).collect())
                .collect(),
        })
    }

    /// `K_{i,j}` for `j = start..start + out.len()`.
    fn fill(&self, i: usize, start: usize, out: &mut [f64]) {
        let mut dist = [0.0_f32; COLUMN_TILE];
        for (chunk, lo) in out
            .chunks_mut(COLUMN_TILE)
            .zip((start..).step_by(COLUMN_TILE))
        {
            let dist = &mut dist[..chunk.len()];
            dist.fill(0.0);
            for col in &self.columns {
                let xi = col[i];
                for (d, &xj) in dist.iter_mut().zip(&col[lo..lo + chunk.len()]) {
                    let t = xi - xj;
                    *d += t * t;
                }
            }
            for (o, &d) in chunk.iter_mut().zip(dist.iter()) {
                *o = self.values[d as usize];
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Source {
    /// Gaussian kernel over data rows.
    Gaussian {
        data: DenseMatrix,
        epsilon: f64,
        table: Option<ExpTable>,
    },
    /// Caller-supplied kernel matrix.
    Custom,
}

/// Kernel matrix `K`, its degree vector, and (in matrix-free mode) what is needed to
/// regenerate kernel rows.
#[derive(Clone, Debug)]
pub struct KernelGraph {
    source: Source,
    mode: KernelMode,
    kernel: Option<DenseMatrix>,
    degrees: Vec<f64>,
}

/// Builds `K_ij = exp(−‖x_i − x_j‖² / ε)` over the rows of `x`.
pub fn build_gaussian_kernel(x: &DenseMatrix, config: &KernelConfig) -> Result<KernelGraph> {
    let m = x.rows();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 data points, got {m}"
        )));
    }
    let epsilon = match config.bandwidth {
        Bandwidth::Fixed(eps) if eps.is_finite() && eps > 0.0 => eps,
        Bandwidth::Fixed(eps) => {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive and finite, got {eps}"
            )))
        }
        Bandwidth::MedianHeuristic => {
            let eps = median_squared_distance(x, config.seed);
            if eps <= 0.0 {
                return Err(Error::DegenerateBandwidth);
            }
            eps
        }
    };
    let table = ExpTable::for_data(x, epsilon);
    let source = Source::Gaussian {
        data: x.clone(),
        epsilon,
        table,
    };
    let mut graph = KernelGraph {
        source,
        mode: config.mode,
        kernel: None,
        degrees: Vec::new(),
    };
    match config.mode {
        KernelMode::Dense => {
            let mut k = DenseMatrix::zeros(m, m);
            k.as_mut_slice()
                .par_chunks_mut(m)
                .enumerate()
                .for_each(|(i, row)| graph.fill_kernel_row(i, row));
            graph.degrees = degrees(&k);
            graph.kernel = Some(k);
        }
        KernelMode::MatrixFree => {
            graph.degrees = (0..m)
                .into_par_iter()
                .map_init(
                    || vec![0.0; COLUMN_TILE],
                    |tile, i| {
                        // Same left-to-right order as the dense row sums.
                        let mut sum = 0.0;
                        for start in (0..m).step_by(COLUMN_TILE) {
                            let k = &mut tile[..COLUMN_TILE.min(m - start)];
                            graph.fill_kernel_span(i, start, k);
                            sum = k.iter().fold(sum, |acc, v| acc + v);
                        }
                        sum
                    },
                )
                .collect();
        }
    }
    Ok(graph)
}

/// Row sums of a kernel matrix.
pub fn degrees(k: &DenseMatrix) -> Vec<f64> {
    (0..k.rows()).map(|i| k.row(i).iter().sum()).collect()
}

impl KernelGraph {
    /// Wraps an explicit kernel matrix. It must be square, symmetric and entrywise
    /// nonnegative; positivity of the degrees is checked when normalizing.
    pub fn from_kernel_matrix(k: DenseMatrix) -> Result<Self> {
        crate::linalg::check_symmetric(&k)?;
        if k.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(
                "kernel entries must be nonnegative".into(),
            ));
        }
        Ok(Self {
            source: Source::Custom,
            mode: KernelMode::Dense,
            degrees: degrees(&k),
            kernel: Some(k),
        })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    /// Bandwidth actually used; `None` for a caller-supplied kernel.
    pub fn epsilon(&self) -> Option<f64> {
        match &self.source {
            Source::Gaussian { epsilon, .. } => Some(*epsilon),
            Source::Custom => None,
        }
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// The materialized kernel; `None` in matrix-free mode.
    pub fn kernel_matrix(&self) -> Option<&DenseMatrix> {
        self.kernel.as_ref()
    }

    pub fn data(&self) -> Option<&DenseMatrix> {
        match &self.source {
            Source::Gaussian { data, .. } => Some(data),
            Source::Custom => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if let Some(k) = &self.kernel {
            return k[(i, j)];
        }
        match &self.source {
            Source::Gaussian {
                data,
                epsilon,
                table,
            } => match table {
                Some(t) => {
                    let mut k = [0.0];
                    t.fill(i, j, &mut k);
                    k[0]
                }
                None => gaussian(squared_distance(data.row(i), data.row(j)), *epsilon),
            },
            Source::Custom => unreachable!("custom kernels are always materialized"),
        }
    }

    /// Writes kernel row `i` into `out`, from storage or recomputed from the data.
    fn fill_kernel_row(&self, i: usize, out: &mut [f64]) {
        self.fill_kernel_span(i, 0, out);
    }

    /// Writes `K_{i,j}` for `j = start..start + out.len()` into `out`.
    fn fill_kernel_span(&self, i: usize, start: usize, out: &mut [f64]) {
        let end = start + out.len();
        if let Some(k) = &self.kernel {
            out.copy_from_slice(&k.row(i)[start..end]);
            return;
        }
        let Source::Gaussian {
            data,
            epsilon,
            table,
        } = &self.source
        else {
            unreachable!("custom kernels are always materialized")
        };
        match table {
            Some(t) => t.fill(i, start, out),
            None => {
                let xi = data.row(i);
                for (j, o) in (start..end).zip(out.iter_mut()) {
                    *o = gaussian(squared_distance(xi, data.row(j)), *epsilon);
                }
            }
        }
    }

    fn check_degrees(&self) -> Result<()> {
        match self.degrees.iter().position(|&d| d.is_nan() || d <= 0.0) {
            Some(i) => Err(Error::ZeroDegree(i)),
            None => Ok(()),
        }
    }
}

/// `acc += Σ_j k_j · w_j`, where `w_j` are consecutive rows of `w` of length `acc.len()`.
fn accumulate(acc: &mut [f64], k: &[f64], w: &[f64]) {
    let b = acc.len();
    let mut kernel = k.chunks_exact(4);
    let mut rows = w.chunks_exact(4 * b);
    for (k, wj) in (&mut kernel).zip(&mut rows) {
        let (w0, rest) = wj.split_at(b);
        let (w1, rest) = rest.split_at(b);
        let (w2, w3) = rest.split_at(b);
        let cols = acc.iter_mut().zip(w0).zip(w1).zip(w2).zip(w3);
        for ((((a, x0), x1), x2), x3) in cols {
            *a += k[0] * x0 + k[1] * x1 + k[2] * x2 + k[3] * x3;
        }
    }
    for (&kj, wj) in kernel
        .remainder()
        .iter()
        .zip(rows.remainder().chunks_exact(b))
    {
        for (a, &x) in acc.iter_mut().zip(wj) {
            *a += kj * x;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    /// `A = D^{-1/2} K D^{-1/2}`.
    Symmetric,
    /// `P = D^{-1} K`.
    RowStochastic,
}

/// Normalized kernel operator, materialized when its graph is dense.
#[derive(Clone, Debug)]
pub struct NormalizedOperator<'g> {
    graph: &'g KernelGraph,
    kind: OperatorKind,
    dense: Option<DenseMatrix>,
    /// Left and right diagonal scalings applied around K.
    left: Vec<f64>,
    right: Vec<f64>,
}

/// `A = D^{-1/2} K D^{-1/2}`, i.e. `A_ij = K_ij / √(d_i d_j)`.
pub fn normalize_symmetric(g: &KernelGraph) -> Result<NormalizedOperator<'_>> {
    g.check_degrees()?;
    let inv_sqrt: Vec<f64> = g.degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let dense = g.kernel.as_ref().map(|k| {
        let m = k.rows();
        let mut a = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let sd_i = g.degrees[i].sqrt();
            for (j, (aij, &kij)) in a.row_mut(i).iter_mut().zip(k.row(i)).enumerate() {
                *aij = kij / (sd_i * g.degrees[j].sqrt());
            }
        }
        a
    });
    Ok(NormalizedOperator {
        graph: g,
        kind: OperatorKind::Symmetric,
        dense,
        left: inv_sqrt.clone(),
        right: inv_sqrt,
    })
}

/// `P = D^{-1} K`; every row sums to one.
pub fn normalize_row_stochastic(g: &KernelGraph) -> Result<NormalizedOperator<'_>> {
    g.check_degrees()?;
    let dense = g.kernel.as_ref().map(|k| {
        let m = k.rows();
        let mut p = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let d = g.degrees[i];
            for (pij, &kij) in p.row_mut(i).iter_mut().zip(k.row(i)) {
                *pij = kij / d;
            }
        }
        p
    });
    Ok(NormalizedOperator {
        graph: g,
        kind: OperatorKind::RowStochastic,
        dense,
        left: g.degrees.iter().map(|d| 1.0 / d).collect(),
        right: vec![1.0; g.len()],
    })
}

impl<'g> NormalizedOperator<'g> {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.graph.len()
    }

    pub fn graph(&self) -> &'g KernelGraph {
        self.graph
    }

    /// The materialized operator, when the graph is dense.
    pub fn dense(&self) -> Option<&DenseMatrix> {
        self.dense.as_ref()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(self.length_error(v.len()));
        }
        let block = DenseMatrix::from_row_major(v.len(), 1, v.to_vec())?;
        Ok(self.apply_block(&block)?.into_vec())
    }

    fn length_error(&self, len: usize) -> Error {
        Error::Dimension(format!(
            "vector of length {len} does not match operator of size {}",
            self.dim()
        ))
    }

    /// Applies the operator to every column of `x` (an `m×b` block).
    pub fn apply_block(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let m = self.dim();
        if x.rows() != m {
            return Err(self.length_error(x.rows()));
        }
        if let Some(op) = &self.dense {
            return op.matmul(x);
        }
        let b = x.cols();
        if b == 0 {
            return Ok(DenseMatrix::zeros(m, 0));
        }
        let mut w = x.clone();
        for (i, s) in self.right.iter().enumerate() {
            w.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        let w = w.as_slice();
        let mut out = DenseMatrix::zeros(m, b);
        // Rows are processed in blocks against column tiles so that each tile of `w` is
        // reused from cache. The summation order is fixed by the tiling, not by threads.
        out.as_mut_slice()
            .par_chunks_mut(ROW_BLOCK * b)
            .enumerate()
            .for_each_init(
                || vec![0.0; COLUMN_TILE],
                |tile, (block, acc)| {
                    let first = block * ROW_BLOCK;
                    let rows = acc.len() / b;
                    for start in (0..m).step_by(COLUMN_TILE) {
                        let width = COLUMN_TILE.min(m - start);
                        let w_tile = &w[start * b..(start + width) * b];
                        for r in 0..rows {
                            let k = &mut tile[..width];
                            self.graph.fill_kernel_span(first + r, start, k);
                            accumulate(&mut acc[r * b..(r + 1) * b], k, w_tile);
                        }
                    }
                    for (r, row) in acc.chunks_exact_mut(b).enumerate() {
                        let s = self.left[first + r];
                        row.iter_mut().for_each(|a| *a *= s);
                    }
                },
            );
        Ok(out)
    }
}
