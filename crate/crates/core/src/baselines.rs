//! Nearest-neighbor rankers used as comparison baselines.

use crate::error::{Error, Result};
use crate::kernel::{squared_distance, KernelGraph};
use crate::linalg::DenseMatrix;
use crate::scoring::Ranking;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMethod {
    NearestNeighbor,
    KernelNearestNeighbor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineRanking {
    pub method: BaselineMethod,
    pub ranking: Ranking,
}

impl BaselineRanking {
    pub fn rank_of(&self, target: usize) -> Result<usize> {
        self.ranking.rank_of(target)
    }
}

fn check_reference(m: usize, reference: usize) -> Result<()> {
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
    Ok(())
}

/// Orders points by Euclidean distance to row `reference`.
pub fn nn_rank(x: &DenseMatrix, reference: usize) -> Result<BaselineRanking> {
    check_reference(x.rows(), reference)?;
    let xr = x.row(reference);
    let dist: Vec<f64> = (0..x.rows())
        .map(|i| squared_distance(x.row(i), xr))
        .collect();
    Ok(BaselineRanking {
        method: BaselineMethod::NearestNeighbor,
        ranking: Ranking::by_key(x.rows(), reference, |i| dist[i]),
    })
}

/// Orders points by the kernel-induced distance `K_rr − 2K_ri + K_ii`.
pub fn kernel_nn_rank(g: &KernelGraph, reference: usize) -> Result<BaselineRanking> {
    let m = g.len();
    check_reference(m, reference)?;
    let krr = g.entry(reference, reference);
    let dist: Vec<f64> = (0..m)
        .map(|i| krr - 2.0 * g.entry(reference, i) + g.entry(i, i))
        .collect();
    Ok(BaselineRanking {
        method: BaselineMethod::KernelNearestNeighbor,
        ranking: Ranking::by_key(m, reference, |i| dist[i]),
    })
}
