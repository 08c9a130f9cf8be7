//! Small dense linear-algebra helpers over row-major `f64` slices.
//!
//! Heavy lifting (SVD) is delegated to `faer`; everything here is the glue
//! the geometry and fitting code needs.

use faer::Mat;

/// Thin SVD `(U, s, V)` with singular values in descending order.
fn thin_svd(data: &[f64], rows: usize, cols: usize) -> (Mat<f64>, Vec<f64>, Mat<f64>) {
    let m = Mat::from_fn(rows, cols, |i, j| data[i * cols + j]);
    let svd = m.thin_svd().expect("SVD of a finite matrix converges");
    let s: Vec<f64> = (0..svd.S().dim()).map(|i| svd.S()[i]).collect();
    (svd.U().to_owned(), s, svd.V().to_owned())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairwise (cascade) summation with a fixed split order.
///
/// The result depends only on the input order, never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Correctly rounded sum of `values` (Shewchuk's partials, as in Python's `fsum`).
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way case: round according to the sign of the remaining partials.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Vectors whose residual norm falls below `rel_tol` times their original norm
/// (or is exactly zero) are dropped, so the output is an orthonormal basis of
/// the numerical span.
pub fn orthonormalize(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let orig = norm_sq(v).sqrt();
        if orig == 0.0 || !orig.is_finite() {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
            }
        }
        let nr = norm_sq(&r).sqrt();
        if nr <= rel_tol * orig {
            continue;
        }
        r.iter_mut().for_each(|x| *x /= nr);
        basis.push(r);
    }
    basis
}

/// Component of `v` orthogonal to the span of the orthonormal rows in `basis`.
pub fn residual(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for b in basis {
        let c = dot(&r, b);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
    }
    r
}

/// Singular values (descending) and right singular vectors of a dense matrix.
pub struct RightSvd {
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per singular value, same order.
    pub vectors: Vec<Vec<f64>>,
}

/// SVD of the row-major `rows x cols` matrix, keeping the right factor.
pub fn right_svd(data: &[f64], rows: usize, cols: usize) -> RightSvd {
    if rows == 0 || cols == 0 {
        return RightSvd { singular_values: vec![], vectors: vec![] };
    }
    let (_, sv, v) = thin_svd(data, rows, cols);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let singular_values = order.iter().map(|&i| sv[i]).collect();
    let vectors = order.iter().map(|&i| (0..cols).map(|r| v[(r, i)]).collect()).collect();
    RightSvd { singular_values, vectors }
}

/// Orthonormal basis of the column space of a row-major `rows x cols` matrix.
///
/// Returns the `rows x rank` basis (row-major) and the retained rank. Rank is
/// decided relative to the largest singular value.
pub fn column_basis(data: &[f64], rows: usize, cols: usize, rel_tol: f64) -> (Vec<f64>, usize) {
    if rows == 0 || cols == 0 {
        return (vec![], 0);
    }
    let (u, sv, _) = thin_svd(data, rows, cols);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return (vec![], 0);
    }
    let mut keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rel_tol * smax).collect();
    keep.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let rank = keep.len();
    let mut out = vec![0.0; rows * rank];
    for r in 0..rows {
        for (c, &col) in keep.iter().enumerate() {
            out[r * rank + c] = u[(r, col)];
        }
    }
    (out, rank)
}
