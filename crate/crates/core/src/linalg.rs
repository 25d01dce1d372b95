//! Dense linear-algebra helpers: sign-normalized thin SVD, truncated
//! pseudo-inverse and greedy index selection.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Thin SVD `A = U diag(σ) Vᵀ` with σ descending and deterministic signs: the
/// largest-magnitude entry of every left singular vector is positive.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        let k = m.min(n);
        if k == 0 {
            return Self {
                u: DMatrix::zeros(m, 0),
                sigma: Vec::new(),
                v: DMatrix::zeros(n, 0),
            };
        }
        // QR first so the Jacobi sweeps run on a k×k triangle
        let (mut u, sigma, mut v) = if m >= n {
            let qr = a.clone().qr();
            let (w, sigma, v) = jacobi_svd(qr.r());
            (qr.q() * w, sigma, v)
        } else {
            let qr = a.transpose().qr();
            let (w, sigma, v) = jacobi_svd(qr.r().transpose());
            (w, sigma, qr.q() * v)
        };
        for c in 0..k {
            let mut best = 0;
            for i in 1..m {
                if u[(i, c)].abs() > u[(best, c)].abs() {
                    best = i;
                }
            }
            if u[(best, c)] < 0.0 {
                u.column_mut(c).neg_mut();
                v.column_mut(c).neg_mut();
            }
        }
        Self { u, sigma, v }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Keep the leading `r` triplets.
    pub fn truncate(mut self, r: usize) -> Self {
        let r = r.min(self.sigma.len());
        self.u = self.u.columns(0, r).into_owned();
        self.v = self.v.columns(0, r).into_owned();
        self.sigma.truncate(r);
        self
    }

    pub fn recompose(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// One-sided Jacobi SVD of a square matrix: rotate column pairs of `A V`
/// until they are mutually orthogonal, then `σ_j = ‖(A V)_j‖`. Accurate for
/// graded and rank-deficient inputs, where the bidiagonal QR iteration in
/// nalgebra can return a wrong factorization.
fn jacobi_svd(a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    debug_assert_eq!(a.nrows(), n);
    let mut w = a;
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut norms: Vec<f64> = (0..n).map(|j| w.column(j).norm_squared()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
                norms[p] = w.column(p).norm_squared();
                norms[q] = w.column(q).norm_squared();
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sigma_of: Vec<f64> = norms.iter().map(|&x| libm::sqrt(x)).collect();
    order.sort_by(|&i, &j| sigma_of[j].total_cmp(&sigma_of[i]).then(i.cmp(&j)));
    let mut u = DMatrix::zeros(n, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (c, &j) in order.iter().enumerate() {
        let s = sigma_of[j];
        sigma.push(s);
        vs.set_column(c, &v.column(j));
        if s > 0.0 {
            u.set_column(c, &(w.column(j) / s));
        } else {
            missing.push(c);
        }
    }
    complete_orthonormal(&mut u, &missing);
    (u, sigma, vs)
}

/// Columns `(p, q) ← (c·p − s·q, s·p + c·q)`.
fn rotate(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Fill the listed columns with unit vectors orthogonal to every other
/// column, trying canonical directions in index order.
fn complete_orthonormal(u: &mut DMatrix<f64>, missing: &[usize]) {
    let n = u.nrows();
    let mut filled: Vec<bool> = (0..u.ncols()).map(|c| !missing.contains(&c)).collect();
    let mut candidate = 0;
    for &c in missing {
        while candidate < n {
            let mut x = DVector::<f64>::zeros(n);
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (k, &ok) in filled.iter().enumerate() {
                    if ok {
                        let d = u.column(k).dot(&x);
                        x.axpy(-d, &u.column(k), 1.0);
                    }
                }
            }
            let norm = x.norm();
            if norm > 0.5 {
                u.set_column(c, &(x / norm));
                filled[c] = true;
                break;
            }
        }
    }
}

/// Truncated Moore–Penrose pseudo-inverse.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    /// `σ_max / σ_min` over the full spectrum (infinite when singular).
    pub condition: f64,
    /// Number of singular values kept.
    pub rank: usize,
    /// True when at least one singular value fell below the cut-off.
    pub truncated: bool,
}

/// Pseudo-inverse dropping singular values below `rel_tol · σ_max`.
pub fn pseudo_inverse(a: &DMatrix<f64>, rel_tol: f64) -> PseudoInverse {
    let (m, n) = a.shape();
    let svd = ThinSvd::new(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let smin = svd.sigma.last().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let mut out = DMatrix::zeros(n, m);
    let mut rank = 0;
    for (c, &s) in svd.sigma.iter().enumerate() {
        if s > cut && s > 0.0 {
            rank += 1;
            let vc = svd.v.column(c);
            let uc = svd.u.column(c);
            out.ger(1.0 / s, &vc, &uc, 1.0);
        }
    }
    PseudoInverse {
        matrix: out,
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        rank,
        truncated: rank < svd.sigma.len(),
    }
}

/// Spectral condition number `σ_max/σ_min` of a matrix (infinite when
/// rank-deficient).
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let svd = ThinSvd::new(a);
    match (svd.sigma.first(), svd.sigma.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Rows `rows` of `a`.
pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Columns `cols` of `a`.
pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Greedy column-pivoted QR on `basisᵀ`: returns `count` row indices of
/// `basis` in selection order. Each pick is the row with the largest residual
/// norm after projecting out the rows already chosen; ties go to the lowest
/// index.
pub fn pivoted_rows(basis: &DMatrix<f64>, count: usize) -> Vec<usize> {
    let (n, r) = basis.shape();
    let count = count.min(n);
    // Candidate rows stored contiguously, `r` values each.
    let mut residual: Vec<f64> = basis.transpose().as_slice().to_vec();
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut norms: Vec<f64> = residual.chunks_exact(r.max(1)).map(norm2).collect();
    if r == 0 {
        norms = vec![0.0; n];
    }
    let mut taken = vec![false; n];
    let mut chosen = Vec::with_capacity(count);
    let mut q = vec![0.0; r];
    for _ in 0..count {
        let mut best = usize::MAX;
        let mut best_norm = -1.0;
        for i in 0..n {
            if !taken[i] && norms[i] > best_norm {
                best_norm = norms[i];
                best = i;
            }
        }
        taken[best] = true;
        chosen.push(best);
        let pivot = &residual[best * r..(best + 1) * r];
        let norm = norm2(pivot).sqrt();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        for (qk, p) in q.iter_mut().zip(pivot) {
            *qk = p / norm;
        }
        for i in 0..n {
            if taken[i] {
                continue;
            }
            let col = &mut residual[i * r..(i + 1) * r];
            let dot: f64 = col.iter().zip(&q).map(|(a, b)| a * b).sum();
            for (c, qk) in col.iter_mut().zip(&q) {
                *c -= dot * qk;
            }
            // recompute rather than downdate: cancellation would corrupt
            // the pivot order for nearly dependent rows
            norms[i] = norm2(col);
        }
    }
    chosen
}

/// Extreme eigenvalues of `M + u uᵀ` given the eigen-decomposition of `M`
/// (ascending `lambda`, `z = Qᵀu`), by bisection on the inertia count of the
/// rank-one secular equation. Robust to repeated eigenvalues and zero weights.
fn rank_one_extremes(lambda: &[f64], z2: &[f64]) -> (f64, f64) {
    let r = lambda.len();
    let znorm2: f64 = z2.iter().sum();
    // Number of eigenvalues of M + uuᵀ strictly below mu.
    let count_below = |mut mu: f64| -> usize {
        if lambda.iter().any(|&l| l == mu) {
            mu += f64::EPSILON * (1.0 + mu.abs());
        }
        let mut below = 0usize;
        let mut f = 1.0;
        for (&l, &w) in lambda.iter().zip(z2) {
            if l < mu {
                below += 1;
            }
            f += w / (l - mu);
        }
        (below + usize::from(f > 0.0)).saturating_sub(1)
    };
    let bisect = |lo0: f64, hi0: f64, target: usize| -> f64 {
        // smallest mu with count_below(mu) >= target
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..48 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let pad = f64::EPSILON * (1.0 + lambda[r - 1].abs() + znorm2);
    let min = bisect(lambda[0] - pad, lambda[0] + znorm2 + pad, 1);
    let max = bisect(lambda[r - 1] - pad, lambda[r - 1] + znorm2 + pad, r);
    (min, max)
}

/// Extends `chosen` by `extra` indices, each time adding the row of `basis`
/// that minimizes the spectral condition number of the sampled block
/// `basis(chosen, :)`. Ties go to the lowest index.
pub fn oversample_rows(basis: &DMatrix<f64>, chosen: &mut Vec<usize>, extra: usize) {
    let (n, r) = basis.shape();
    if r == 0 {
        return;
    }
    let mut taken = vec![false; n];
    for &i in chosen.iter() {
        taken[i] = true;
    }
    let mut z2 = vec![0.0; r];
    for _ in 0..extra {
        if chosen.len() >= n {
            break;
        }
        let mut gram = DMatrix::<f64>::zeros(r, r);
        for &i in chosen.iter() {
            let row = basis.row(i);
            gram.ger(1.0, &row.transpose(), &row.transpose(), 1.0);
        }
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lambda: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let q = DMatrix::from_fn(r, r, |i, j| eig.eigenvectors[(i, order[j])]);
        let scale = lambda[r - 1].abs().max(f64::MIN_POSITIVE);

        let project = |i: usize, z2: &mut [f64]| {
            for (j, zj) in z2.iter_mut().enumerate() {
                let s = basis.row(i).dot(&q.column(j).transpose());
                *zj = s * s;
            }
        };
        // Rayleigh quotients along the extreme eigenvectors bound the new
        // condition number from below; exact evaluation in bound order can
        // stop once the bound passes the best value found.
        let low = basis * q.column(0);
        let high = basis * q.column(r - 1);
        let mut bounds: Vec<(f64, usize)> = Vec::with_capacity(n);
        for i in (0..n).filter(|&i| !taken[i]) {
            let hi = lambda[r - 1] + high[i] * high[i];
            let mut lo = lambda[0] + low[i] * low[i];
            if r > 1 {
                lo = lo.min(lambda[1]);
            }
            let bound = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            bounds.push((bound, i));
        }
        bounds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best = usize::MAX;
        let mut best_key = f64::INFINITY;
        for &(bound, i) in &bounds {
            if best != usize::MAX && bound > best_key * (1.0 + 1e-12) {
                break;
            }
            project(i, &mut z2);
            let (lo, hi) = rank_one_extremes(&lambda, &z2);
            let key = if lo > 1e-14 * scale { hi / lo } else { f64::INFINITY };
            if best == usize::MAX || key < best_key || (key == best_key && i < best) {
                best = i;
                best_key = key;
            }
        }
        taken[best] = true;
        chosen.push(best);
    }
}
