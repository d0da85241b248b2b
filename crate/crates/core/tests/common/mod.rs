//! Test-only helpers: an independent brute-force pipeline built on nalgebra, seeded data,
//! and the synthetic marker image.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locspec::datasets::{plant_patch, synthetic_texture, GrayImage};
use locspec::linalg::DenseMatrix;

/// Uniform data in `[-1, 1)^dim`.
pub fn uniform_data(m: usize, dim: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    DenseMatrix::from_rows(&rows).unwrap()
}

/// Median of all pairwise squared distances, sorting the full list.
pub fn oracle_median(x: &DenseMatrix) -> f64 {
    let m = x.rows();
    let mut d = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            d.push(
                x.row(i)
                    .iter()
                    .zip(x.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>(),
            );
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = d.len();
    if n % 2 == 1 {
        d[n / 2]
    } else {
        0.5 * (d[n / 2 - 1] + d[n / 2])
    }
}

/// Leading `l` eigenpairs of `A = D^{-1/2} K D^{-1/2}` via nalgebra's full decomposition.
pub fn oracle_basis(x: &DenseMatrix, epsilon: f64, l: usize) -> (Vec<f64>, DMatrix<f64>) {
    let m = x.rows();
    let k = DMatrix::from_fn(m, m, |i, j| {
        let d2: f64 = x
            .row(i)
            .iter()
            .zip(x.row(j))
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        (-d2 / epsilon).exp()
    });
    let d: Vec<f64> = (0..m).map(|i| k.row(i).sum()).collect();
    let a = DMatrix::from_fn(m, m, |i, j| k[(i, j)] / (d[i] * d[j]).sqrt());
    let eig = SymmetricEigen::new(a);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&p, &q| eig.eigenvalues[q].partial_cmp(&eig.eigenvalues[p]).unwrap());
    let values = idx[..l].iter().map(|&c| eig.eigenvalues[c]).collect();
    let u = DMatrix::from_fn(m, l, |i, c| eig.eigenvectors[(i, idx[c])]);
    (values, u)
}

/// Magnitude-mode localized scores computed straight from the definition.
pub fn oracle_scores(u: &DMatrix<f64>, r: usize, k: usize) -> Vec<f64> {
    let l = u.ncols();
    let mut cols: Vec<usize> = (0..l).collect();
    cols.sort_by(|&a, &b| {
        u[(r, b)]
            .abs()
            .partial_cmp(&u[(r, a)].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    cols.truncate(k);
    let norm = cols.iter().map(|&j| u[(r, j)].powi(2)).sum::<f64>().sqrt();
    (0..u.nrows())
        .map(|i| {
            cols.iter()
                .map(|&j| u[(i, j)].abs() * u[(r, j)].abs())
                .sum::<f64>()
                .abs()
                / norm
        })
        .collect()
}

/// Indices other than `r`, by score descending then index ascending.
pub fn oracle_order(scores: &[f64], r: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&i| i != r).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    order
}

pub const MARKER: [u8; 9] = [250, 20, 250, 20, 250, 20, 250, 20, 250];
pub const MARKER_CENTER: (usize, usize) = (30, 30);
pub const DUPLICATE_CENTER: (usize, usize) = (30, 40);

/// 64×64 texture with a distinctive 3×3 marker at (30, 30) and an exact copy 10 pixels to
/// the right.
pub fn marker_image() -> GrayImage {
    let mut img = synthetic_texture(64, 64, 1).unwrap();
    plant_patch(&mut img, MARKER_CENTER.0, MARKER_CENTER.1, 3, &MARKER);
    plant_patch(&mut img, DUPLICATE_CENTER.0, DUPLICATE_CENTER.1, 3, &MARKER);
    img
}
