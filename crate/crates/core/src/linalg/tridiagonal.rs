//! Symmetric eigensolver for larger matrices: Householder reduction to tridiagonal form,
//! implicit QL iterations for the spectrum, and either accumulated QL rotations (full
//! spectrum) or inverse iteration (a few leading eigenvectors).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_symmetric, orient_and_sort, DenseMatrix, SymmetricEigen};
use crate::error::Result;

/// Tridiagonal form `Qᵀ S Q = T` with the reflectors that build `Q`.
struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `diag[i]` and `diag[i + 1]`; `off[n - 1] = 0`.
    off: Vec<f64>,
    /// Reflector `k` acts on coordinates `k + 1..n`; `None` when the column was already reduced.
    reflectors: Vec<Option<(Vec<f64>, f64)>>,
}

/// Dot product with four independent accumulators (fixed summation order).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Rank-2 update `B ← B − v wᵀ − w vᵀ` not yet applied to the lower triangle; `v` and `w`
/// are indexed from row/column `start`.
struct Pending {
    v: Vec<f64>,
    w: Vec<f64>,
    start: usize,
}

fn tridiagonalize(s: &DenseMatrix) -> Tridiagonal {
    let n = s.rows();
    // Only the lower triangle (j <= i) of `a` is kept current. Each step's rank-2 update
    // is deferred and fused with the next step's matrix-vector product, so the trailing
    // block is streamed once per step.
    let mut a = s.clone();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut pending: Option<Pending> = None;

    for k in 0..n.saturating_sub(1) {
        if let Some(u) = &pending {
            for i in k..n {
                let (r, c) = (i - u.start, k - u.start);
                a[(i, k)] -= u.v[r] * u.w[c] + u.w[r] * u.v[c];
            }
        }
        diag[k] = a[(k, k)];
        let alpha = a[(k + 1, k)];
        let tail: f64 = ((k + 2)..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        let start = k + 1;
        let size = n - start;
        let reflector = if tail == 0.0 {
            off[k] = alpha;
            None
        } else {
            let norm = (alpha * alpha + tail).sqrt();
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let pivot = alpha - beta;
            let tau = (beta - alpha) / beta;
            let mut v = Vec::with_capacity(size);
            v.push(1.0);
            v.extend(((k + 2)..n).map(|i| a[(i, k)] / pivot));
            off[k] = beta;
            Some((v, tau))
        };

        // One pass over the trailing block B = a[start.., start..]: apply the deferred
        // update, then accumulate p = B v from the fresh lower triangle.
        let mut p = vec![0.0; if reflector.is_some() { size } else { 0 }];
        for i in 0..size {
            let row = &mut a.row_mut(start + i)[start..start + i + 1];
            if let Some(u) = &pending {
                let shift = start - u.start;
                let (vi, wi) = (u.v[i + shift], u.w[i + shift]);
                let (vs, ws) = (&u.v[shift..shift + i + 1], &u.w[shift..shift + i + 1]);
                for ((x, &vj), &wj) in row.iter_mut().zip(vs).zip(ws) {
                    *x -= vi * wj + wi * vj;
                }
            }
            if let Some((v, _)) = &reflector {
                let vi = v[i];
                let acc = dot(&row[..i], &v[..i]);
                for (pj, &bij) in p[..i].iter_mut().zip(&row[..i]) {
                    *pj += bij * vi;
                }
                p[i] += acc + row[i] * vi;
            }
        }

        pending = match reflector {
            Some((v, tau)) => {
                p.iter_mut().for_each(|x| *x *= tau);
                let half = 0.5 * tau * dot(&p, &v);
                // w = p − (τ/2)(pᵀv) v
                for (pi, &vi) in p.iter_mut().zip(&v) {
                    *pi -= half * vi;
                }
                reflectors.push(Some((v.clone(), tau)));
                Some(Pending { v, w: p, start })
            }
            None => {
                reflectors.push(None);
                None
            }
        };
    }
    if n > 0 {
        if let Some(u) = &pending {
            let r = n - 1 - u.start;
            a[(n - 1, n - 1)] -= u.v[r] * u.w[r] + u.w[r] * u.v[r];
        }
        diag[n - 1] = a[(n - 1, n - 1)];
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

/// Applies `Q = H₀ H₁ ⋯` to a vector in place.
fn apply_q(reflectors: &[Option<(Vec<f64>, f64)>], x: &mut [f64]) {
    for (k, reflector) in reflectors.iter().enumerate().rev() {
        if let Some((v, tau)) = reflector {
            let seg = &mut x[k + 1..];
            let dot: f64 = seg.iter().zip(v).map(|(a, b)| a * b).sum();
            let scale = tau * dot;
            for (s, &vi) in seg.iter_mut().zip(v) {
                *s -= scale * vi;
            }
        }
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. When `rows` is given, every rotation is
/// also applied to those rows (the transposed accumulated basis).
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], mut rows: Option<&mut DenseMatrix>) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut shift = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n {
            if off[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            for _ in 0..200 {
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                shift += h;

                p = diag[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    if let Some(rows) = rows.as_deref_mut() {
                        let cols = rows.cols();
                        let data = rows.as_mut_slice();
                        let (head, tail) = data.split_at_mut((i + 1) * cols);
                        let ri = &mut head[i * cols..];
                        let rn = &mut tail[..cols];
                        for (a, b) in ri.iter_mut().zip(rn.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift;
        off[l] = 0.0;
    }
}

/// Tridiagonal `T − λI` factored by Gaussian elimination with partial pivoting.
struct ShiftedFactor {
    diag: Vec<f64>,
    sup1: Vec<f64>,
    sup2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl ShiftedFactor {
    fn new(diag: &[f64], off: &[f64], lambda: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut f = ShiftedFactor {
            diag: vec![0.0; n],
            sup1: vec![0.0; n],
            sup2: vec![0.0; n],
            mult: vec![0.0; n],
            swap: vec![false; n],
        };
        let mut p = diag[0] - lambda;
        let mut q = if n > 1 { off[0] } else { 0.0 };
        for i in 0..n - 1 {
            let a = off[i];
            let b_next = diag[i + 1] - lambda;
            let c_next = if i + 2 < n { off[i + 1] } else { 0.0 };
            if p.abs() >= a.abs() {
                let pivot = if p == 0.0 { tiny } else { p };
                let mult = a / pivot;
                f.diag[i] = pivot;
                f.sup1[i] = q;
                f.mult[i] = mult;
                p = b_next - mult * q;
                q = c_next;
            } else {
                let mult = p / a;
                f.diag[i] = a;
                f.sup1[i] = b_next;
                f.sup2[i] = c_next;
                f.mult[i] = mult;
                f.swap[i] = true;
                p = q - mult * b_next;
                q = -mult * c_next;
            }
        }
        f.diag[n - 1] = if p == 0.0 { tiny } else { p };
        f
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= self.mult[i] * rhs[i];
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            if i + 1 < n {
                acc -= self.sup1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                acc -= self.sup2[i] * rhs[i + 2];
            }
            rhs[i] = acc / self.diag[i];
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn orthogonalize_against(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum();
        for (xi, &bi) in x.iter_mut().zip(b) {
            *xi -= dot * bi;
        }
    }
}

/// Eigenvectors of the tridiagonal matrix for the given (descending) eigenvalues.
fn inverse_iteration(diag: &[f64], off: &[f64], values: &[f64]) -> Vec<Vec<f64>> {
    const ITERATIONS: usize = 4;
    let n = diag.len();
    let norm = (0..n)
        .map(|i| diag[i].abs() + off[i].abs() + if i > 0 { off[i - 1].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let cluster_gap = 1e-3 * norm;
    let perturb = 10.0 * f64::EPSILON * norm;
    let tiny = f64::EPSILON * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7d1a_90a1);

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    let mut prev_shift = f64::INFINITY;
    for (j, &lambda) in values.iter().enumerate() {
        let mut shift = lambda;
        if j > 0 {
            if values[j - 1] - lambda > cluster_gap {
                cluster_start = j;
            } else if prev_shift - shift < perturb {
                shift = prev_shift - perturb;
            }
        }
        prev_shift = shift;
        let factor = ShiftedFactor::new(diag, off, shift, tiny);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        normalize(&mut x);
        for _ in 0..ITERATIONS {
            orthogonalize_against(&mut x, &vectors[cluster_start..j]);
            factor.solve(&mut x);
            normalize(&mut x);
        }
        orthogonalize_against(&mut x, &vectors[cluster_start..j]);
        normalize(&mut x);
        vectors.push(x);
    }
    vectors
}

/// Leading `count` eigenpairs of a symmetric matrix, values descending.
///
/// With `count == n` every eigenvector is accumulated through the QL sweep; otherwise only
/// the requested eigenvectors are computed by inverse iteration on the tridiagonal form.
pub fn symmetric_eigen_top(s: &DenseMatrix, count: usize) -> Result<SymmetricEigen> {
    check_symmetric(s)?;
    let n = s.rows();
    let count = count.clamp(1, n);
    let Tridiagonal {
        mut diag,
        mut off,
        reflectors,
    } = tridiagonalize(s);

    if count == n {
        // Rows of `qt` are the columns of Q; QL rotations then mix those rows.
        let mut qt = DenseMatrix::identity(n);
        for i in 0..n {
            apply_q(&reflectors, qt.row_mut(i));
        }
        tridiagonal_ql(&mut diag, &mut off, Some(&mut qt));
        return Ok(orient_and_sort(diag, |i, c| qt[(c, i)], n, n));
    }

    let (t_diag, t_off) = (diag.clone(), off.clone());
    tridiagonal_ql(&mut diag, &mut off, None);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order[..count].iter().map(|&i| diag[i]).collect();
    let mut vectors = inverse_iteration(&t_diag, &t_off, &values);
    for x in vectors.iter_mut() {
        apply_q(&reflectors, x);
    }
    Ok(orient_and_sort(values, |i, c| vectors[c][i], n, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn max_residual(s: &DenseMatrix, eig: &SymmetricEigen) -> f64 {
        (0..eig.values.len())
            .map(|c| {
                let u = eig.vectors.column(c);
                let su = s.mul_vec(&u).unwrap();
                su.iter()
                    .zip(&u)
                    .map(|(a, b)| (a - eig.values[c] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn full_spectrum_reconstructs() {
        let s = random_symmetric(40, 3);
        let eig = symmetric_eigen_top(&s, 40).unwrap();
        assert!(max_residual(&s, &eig) < 1e-12);
        let g = eig.vectors.t_matmul(&eig.vectors).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - target).abs() < 1e-12);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn leading_pairs_match_full_spectrum() {
        let s = random_symmetric(60, 11);
        let full = symmetric_eigen_top(&s, 60).unwrap();
        let top = symmetric_eigen_top(&s, 6).unwrap();
        assert!(max_residual(&s, &top) < 1e-12);
        for c in 0..6 {
            assert!((full.values[c] - top.values[c]).abs() < 1e-12);
            for i in 0..60 {
                assert!((full.vectors[(i, c)] - top.vectors[(i, c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_get_orthogonal_vectors() {
        let mut s = DenseMatrix::identity(8);
        s[(0, 0)] = 3.0;
        let eig = symmetric_eigen_top(&s, 4).unwrap();
        assert_eq!(eig.values[0], 3.0);
        let g = eig.vectors.t_matmul(&eig.vectors).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - target).abs() < 1e-12, "{g:?}");
            }
        }
        assert!(max_residual(&s, &eig) < 1e-12);
    }

    #[test]
    fn one_by_one() {
        let s = DenseMatrix::from_rows(&[[-2.5]]).unwrap();
        let eig = symmetric_eigen_top(&s, 1).unwrap();
        assert_eq!(eig.values, vec![-2.5]);
        assert_eq!(eig.vectors[(0, 0)], 1.0);
    }
}
