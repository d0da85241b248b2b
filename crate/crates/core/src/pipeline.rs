//! End-to-end similarity search: kernel graph, eigenbasis, localized selection, scores.

use crate::error::{Error, Result};
use crate::kernel::{
    build_gaussian_kernel, normalize_symmetric, Bandwidth, KernelConfig, KernelGraph, KernelMode,
};
use crate::linalg::DenseMatrix;
use crate::scoring::{
    build_localized_embedding, rank, score, select_top_coordinates, LocalizedSelection, Ranking,
    ScoreMode, ScoreVector,
};
use crate::solver::{solve, EigenBasis, SolverConfig, SolverMethod};

/// Randomized solves switch to a matrix-free kernel above this many points unless a
/// kernel mode is forced.
pub const MATRIX_FREE_THRESHOLD: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub bandwidth: Bandwidth,
    /// Number of localized eigenvectors.
    pub k: usize,
    pub solver: SolverConfig,
    pub mode: ScoreMode,
    /// Scale eigenvectors by their eigenvalues before selection.
    pub weight_eigenvalues: bool,
    /// `None` picks dense or matrix-free from the problem size and solver.
    pub kernel_mode: Option<KernelMode>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::MedianHeuristic,
            k: 3,
            solver: SolverConfig::new(15),
            mode: ScoreMode::Magnitude,
            weight_eigenvalues: false,
            kernel_mode: None,
        }
    }
}

impl SearchParams {
    fn kernel_mode_for(&self, m: usize) -> KernelMode {
        match (self.kernel_mode, self.solver.method.resolve(m)) {
            (Some(mode), _) => mode,
            (None, SolverMethod::Dense) => KernelMode::Dense,
            (None, _) if m > MATRIX_FREE_THRESHOLD => KernelMode::MatrixFree,
            (None, _) => KernelMode::Dense,
        }
    }

    /// Checks every parameter against a problem of `m` points before any computation.
    pub fn validate(&self, m: usize, reference: usize) -> Result<()> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 data points, got {m}"
            )));
        }
        if reference >= m {
            return Err(Error::IndexOutOfRange {
                index: reference,
                len: m,
            });
        }
        let l = self.solver.eigenpairs;
        if l == 0 || l > m {
            return Err(Error::InvalidParameter(format!(
                "l must be in 1..={m}, got {l}"
            )));
        }
        if self.k == 0 || self.k > l {
            return Err(Error::InvalidParameter(format!(
                "k must be in 1..={l} (k <= l), got {}",
                self.k
            )));
        }
        let method = self.solver.method.resolve(m);
        if method == SolverMethod::Randomized && l + self.solver.oversampling > m {
            return Err(Error::InvalidParameter(format!(
                "l + oversampling = {} exceeds the {m} data points",
                l + self.solver.oversampling
            )));
        }
        if method == SolverMethod::Dense && self.kernel_mode_for(m) == KernelMode::MatrixFree {
            return Err(Error::RequiresDense);
        }
        if let Bandwidth::Fixed(eps) = self.bandwidth {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Bandwidth actually used (the realized median when the heuristic is on).
    pub epsilon: f64,
    pub method: SolverMethod,
    pub kernel_mode: KernelMode,
    pub basis: EigenBasis,
    pub selection: LocalizedSelection,
    pub scores: ScoreVector,
    pub ranking: Ranking,
}

/// Kernel graph for `x` as `params` would build it.
pub fn build_graph(x: &DenseMatrix, params: &SearchParams) -> Result<KernelGraph> {
    build_gaussian_kernel(
        x,
        &KernelConfig {
            bandwidth: params.bandwidth,
            mode: params.kernel_mode_for(x.rows()),
            seed: params.solver.seed,
        },
    )
}

/// Scores every point of an existing graph against `reference`.
pub fn search_graph(
    g: &KernelGraph,
    reference: usize,
    params: &SearchParams,
) -> Result<SearchOutcome> {
    let m = g.len();
    params.validate(m, reference)?;
    let op = normalize_symmetric(g)?;
    let method = params.solver.method.resolve(m);
    let basis = solve(&op, &params.solver)?;
    let selection_basis = if params.weight_eigenvalues {
        basis.weighted_by_eigenvalues()
    } else {
        basis.clone()
    };
    let selection = select_top_coordinates(&selection_basis, reference, params.k, params.mode)?;
    let embedding = build_localized_embedding(&selection_basis, &selection)?;
    let scores = score(&embedding, &selection)?;
    let ranking = rank(&scores);
    Ok(SearchOutcome {
        epsilon: g.epsilon().unwrap_or(f64::NAN),
        method,
        kernel_mode: g.mode(),
        basis,
        selection,
        scores,
        ranking,
    })
}

/// Runs the whole search on a data matrix.
pub fn find_similarities(
    x: &DenseMatrix,
    reference: usize,
    params: &SearchParams,
) -> Result<SearchOutcome> {
    params.validate(x.rows(), reference)?;
    let g = build_graph(x, params)?;
    search_graph(&g, reference, params)
}
