//! Localized scoring: reorder eigenvectors by how strongly they load on the reference point,
//! keep the top `k`, and correlate every point's localized coordinates with the reference's.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::solver::EigenBasis;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScoreMode {
    /// Localized coordinates are `|U(i, j)|`.
    #[default]
    Magnitude,
    /// Localized coordinates keep their sign.
    Signed,
}

/// The `k` eigenvectors most significant to the reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedSelection {
    pub reference: usize,
    /// Eigenvector indices ordered by `|u_{r,j}|` descending.
    pub perm: Vec<usize>,
    pub mode: ScoreMode,
    /// Reference row of the localized embedding: `|u_{r,j_c}|` in magnitude mode,
    /// `u_{r,j_c}` in signed mode.
    pub reference_local: Vec<f64>,
}

impl LocalizedSelection {
    pub fn k(&self) -> usize {
        self.perm.len()
    }

    /// `‖ũ_r(1:k)‖₂`.
    pub fn reference_norm(&self) -> f64 {
        self.reference_local
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Picks the `k` eigenvectors with the largest `|u_{r,j}|`; ties go to the lower index,
/// i.e. the larger eigenvalue.
pub fn select_top_coordinates(
    basis: &EigenBasis,
    reference: usize,
    k: usize,
    mode: ScoreMode,
) -> Result<LocalizedSelection> {
    let (m, l) = (basis.points(), basis.len());
    if reference >= m {
        return Err(Error::IndexOutOfRange {
            index: reference,
            len: m,
        });
    }
    if k == 0 || k > l {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={l} (the number of eigenpairs), got {k}"
        )));
    }
    let row = basis.vectors.row(reference);
    if row.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroReference(reference));
    }
    let mut perm: Vec<usize> = (0..l).collect();
    perm.sort_by(|&a, &b| {
        row[b]
            .abs()
            .partial_cmp(&row[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    perm.truncate(k);
    let reference_local = perm
        .iter()
        .map(|&j| match mode {
            ScoreMode::Magnitude => row[j].abs(),
            ScoreMode::Signed => row[j],
        })
        .collect();
    Ok(LocalizedSelection {
        reference,
        perm,
        mode,
        reference_local,
    })
}

/// The `m×k` localized embedding `T_k`: column `c` is eigenvector `perm[c]`, in absolute
/// value for magnitude mode.
pub fn build_localized_embedding(
    basis: &EigenBasis,
    sel: &LocalizedSelection,
) -> Result<DenseMatrix> {
    if sel.reference >= basis.points() || sel.perm.iter().any(|&j| j >= basis.len()) {
        return Err(Error::Dimension(
            "selection does not match the eigenbasis".into(),
        ));
    }
    let k = sel.k();
    let mut t = DenseMatrix::zeros(basis.points(), k);
    for i in 0..basis.points() {
        let src = basis.vectors.row(i);
        for (dst, &j) in t.row_mut(i).iter_mut().zip(&sel.perm) {
            *dst = match sel.mode {
                ScoreMode::Magnitude => src[j].abs(),
                ScoreMode::Signed => src[j],
            };
        }
    }
    Ok(t)
}

/// Nonnegative similarity of every point to the reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub reference: usize,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `|T_k · ũ_r / ‖ũ_r‖|` for every row of `T_k`.
pub fn score(t: &DenseMatrix, sel: &LocalizedSelection) -> Result<ScoreVector> {
    if t.cols() != sel.k() || sel.reference >= t.rows() {
        return Err(Error::Dimension(format!(
            "embedding is {}x{} but the selection has k = {} and reference {}",
            t.rows(),
            t.cols(),
            sel.k(),
            sel.reference
        )));
    }
    let norm = sel.reference_norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference(sel.reference));
    }
    let unit: Vec<f64> = sel.reference_local.iter().map(|v| v / norm).collect();
    let values = (0..t.rows())
        .map(|i| {
            t.row(i)
                .iter()
                .zip(&unit)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
        })
        .collect();
    Ok(ScoreVector {
        values,
        reference: sel.reference,
    })
}

/// Points other than the reference, most similar first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub reference: usize,
    pub order: Vec<usize>,
}

impl Ranking {
    /// Orders every index except `reference` by `key` (smaller first), ties by index.
    pub(crate) fn by_key(len: usize, reference: usize, key: impl Fn(usize) -> f64) -> Self {
        let mut order: Vec<usize> = (0..len).filter(|&i| i != reference).collect();
        order.sort_by(|&a, &b| {
            key(a)
                .partial_cmp(&key(b))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        Ranking { reference, order }
    }

    /// 1-based position of `target` (1 = most similar).
    pub fn rank_of(&self, target: usize) -> Result<usize> {
        if target == self.reference {
            return Err(Error::InvalidParameter(format!(
                "target {target} is the reference point"
            )));
        }
        self.order
            .iter()
            .position(|&i| i == target)
            .map(|p| p + 1)
            .ok_or(Error::IndexOutOfRange {
                index: target,
                len: self.order.len() + 1,
            })
    }
}

/// Ranks points by score, highest first, excluding the reference; ties go to the lower index.
pub fn rank(scores: &ScoreVector) -> Ranking {
    Ranking::by_key(scores.len(), scores.reference, |i| -scores.values[i])
}
