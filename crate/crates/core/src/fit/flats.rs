use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::center::weighted_centroid;
use super::{best_of, stream_rng, FitMethod, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::geometry::{cost, DistanceConfig, PointSet};
use crate::linalg::{orthonormalize, pairwise_sum, right_svd};
use crate::shape::{Flat, Shape};

/// Least-squares optimal j-flat of a weighted point cloud.
pub(crate) struct L2Flat {
    pub flat: Flat,
    /// `min over j-flats of sum w |p - F|^2`, from the discarded singular values.
    pub sq_cost: f64,
}

/// Centroid plus the top-j right singular vectors of the weighted, centered data.
pub(crate) fn best_l2_flat(pts: &[&[f64]], ws: &[f64], j: usize) -> L2Flat {
    let d = pts[0].len();
    let mu = weighted_centroid(pts, ws);
    let mut data = Vec::with_capacity(pts.len() * d);
    for (p, w) in pts.iter().zip(ws) {
        let s = w.sqrt();
        data.extend(p.iter().zip(&mu).map(|(x, m)| s * (x - m)));
    }
    let svd = right_svd(&data, pts.len(), d);
    let mut dirs: Vec<Vec<f64>> = svd.vectors.iter().take(j).cloned().collect();
    let sq_cost = svd.singular_values.iter().skip(j).map(|s| s * s).sum();
    if dirs.len() < j {
        dirs = complete_basis(dirs, d, j);
    }
    let flat = Flat::new(mu, &dirs).expect("orthonormal singular vectors");
    L2Flat { flat, sq_cost }
}

/// Extends orthonormal `dirs` to `j` vectors with coordinate axes.
pub(crate) fn complete_basis(mut dirs: Vec<Vec<f64>>, d: usize, j: usize) -> Vec<Vec<f64>> {
    for axis in 0..d {
        if dirs.len() >= j {
            break;
        }
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        let mut all = dirs.clone();
        all.push(e);
        let ortho = orthonormalize(&all, 1e-8);
        if ortho.len() > dirs.len() {
            dirs = ortho;
        }
    }
    dirs
}

/// Best j-flat: exact for z = 2. For other z the least-squares flat is
/// returned with a certified approximation factor.
///
/// The factor compares the z-cost of the flat with a lower bound on the
/// optimal z-cost derived from the optimal squared cost by power-mean
/// inequalities, so it is valid though possibly loose.
pub fn fit_jflat(points: &PointSet, j: usize, cfg: &DistanceConfig, opts: &FitOptions) -> Result<FitResult> {
    let d = points.dim();
    if j >= d {
        return Err(Error::input(format!("j = {j} must be at most d-1 = {}", d - 1)));
    }
    let pts: Vec<&[f64]> = points.points().collect();
    let l2 = best_l2_flat(&pts, points.weights(), j);
    let shape = Shape::jflat(l2.flat)?;
    let c = cost(points, &shape, cfg)?;
    let certified = if cfg.z == 2.0 { 1.0 } else { certified_factor(points, c, l2.sq_cost, cfg.z) };
    Ok(FitResult {
        shape,
        cost: c,
        approx_factor: opts.factor_or(certified)?,
        method: FitMethod::FlatSvd,
        seed: opts.seed,
    })
}

fn certified_factor(points: &PointSet, cost_z: f64, opt_sq: f64, z: f64) -> f64 {
    let total_w = points.total_weight();
    let lower = if z >= 2.0 {
        total_w * (opt_sq / total_w).powf(z / 2.0)
    } else {
        let w_min = points.weights().iter().cloned().fold(f64::INFINITY, f64::min);
        (w_min.powf(2.0 / z - 1.0) * opt_sq).powf(z / 2.0)
    };
    if lower <= 0.0 || cost_z <= 0.0 {
        1.0
    } else {
        (cost_z / lower).max(1.0)
    }
}

/// k lines by alternating assignment and least-squares refits.
pub fn fit_klines(points: &PointSet, k: usize, cfg: &DistanceConfig, opts: &FitOptions) -> Result<FitResult> {
    let (flats, c) = fit_flats(points, 1, k, cfg, opts)?;
    Ok(FitResult {
        shape: Shape::klines(flats)?,
        cost: c,
        approx_factor: opts.factor_or(4.0)?,
        method: FitMethod::FlatsAlternating,
        seed: opts.seed,
    })
}

/// k j-flats by alternating assignment and least-squares refits.
pub fn fit_kjflats(points: &PointSet, j: usize, k: usize, cfg: &DistanceConfig, opts: &FitOptions) -> Result<FitResult> {
    let (flats, c) = fit_flats(points, j, k, cfg, opts)?;
    Ok(FitResult {
        shape: Shape::kjflats(flats)?,
        cost: c,
        approx_factor: opts.factor_or(4.0)?,
        method: FitMethod::FlatsAlternating,
        seed: opts.seed,
    })
}

fn fit_flats(points: &PointSet, j: usize, k: usize, cfg: &DistanceConfig, opts: &FitOptions) -> Result<(Vec<Flat>, f64)> {
    let d = points.dim();
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::input(format!("k = {k} exceeds the number of points n = {}", points.len())));
    }
    if j >= d {
        return Err(Error::input(format!("j = {j} must be at most d-1 = {}", d - 1)));
    }
    let restarts = opts.restarts.max(1);
    let runs: Vec<(f64, Vec<Flat>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(opts.seed, r as u64);
            let seeds = seed_flats(points, j, k, cfg, &mut rng);
            alternate(points, seeds, j, cfg, opts.max_iter, opts.tol)
        })
        .collect();
    let (c, flats) = best_of(runs).expect("at least one restart");
    Ok((flats, c))
}

fn seed_flats<R: Rng>(points: &PointSet, j: usize, k: usize, cfg: &DistanceConfig, rng: &mut R) -> Vec<Flat> {
    let d = points.dim();
    let uniform = WeightedIndex::new(points.weights()).expect("positive weights");
    let mut flats: Vec<Flat> = Vec::with_capacity(k);
    let mut dist: Vec<f64> = vec![f64::INFINITY; points.len()];
    for _ in 0..k {
        // Anchor by D^z sampling against the flats chosen so far.
        let anchor_idx = if flats.is_empty() {
            uniform.sample(rng)
        } else {
            let scores: Vec<f64> = dist.iter().zip(points.weights()).map(|(x, w)| x * w).collect();
            WeightedIndex::new(&scores).map(|w| w.sample(rng)).unwrap_or_else(|_| uniform.sample(rng))
        };
        let anchor = points.point(anchor_idx).to_vec();
        let mut dirs: Vec<Vec<f64>> = (0..j)
            .map(|_| {
                let q = points.point(uniform.sample(rng));
                q.iter().zip(&anchor).map(|(a, b)| a - b).collect()
            })
            .collect();
        dirs = orthonormalize(&dirs, 1e-8);
        while dirs.len() < j {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let mut all = dirs.clone();
            all.push(g);
            dirs = orthonormalize(&all, 1e-8);
        }
        let f = Flat::new(anchor, &dirs).expect("orthonormal directions");
        for (i, p) in points.points().enumerate() {
            dist[i] = dist[i].min(cfg.from_sq(f.sq_dist(p)));
        }
        flats.push(f);
    }
    flats
}

fn assign_flats(points: &PointSet, flats: &[Flat], cfg: &DistanceConfig) -> (Vec<usize>, f64) {
    let mut labels = Vec::with_capacity(points.len());
    let mut terms = Vec::with_capacity(points.len());
    for (p, w) in points.points().zip(points.weights()) {
        let mut best = (0, f64::INFINITY);
        for (i, f) in flats.iter().enumerate() {
            let sq = f.sq_dist(p);
            if sq < best.1 {
                best = (i, sq);
            }
        }
        labels.push(best.0);
        terms.push(w * cfg.from_sq(best.1));
    }
    (labels, pairwise_sum(&terms))
}

/// Alternation from `flats`; returns the best (cost, flats) seen.
fn alternate(points: &PointSet, mut flats: Vec<Flat>, j: usize, cfg: &DistanceConfig, max_iter: usize, tol: f64) -> (f64, Vec<Flat>) {
    let k = flats.len();
    let (mut labels, mut current) = assign_flats(points, &flats, cfg);
    let mut best = (current, flats.clone());
    for _ in 0..max_iter {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        for (c, idx) in members.iter().enumerate() {
            // Too few points to determine a j-flat: keep the previous one.
            if idx.len() < j + 1 {
                continue;
            }
            let pts: Vec<&[f64]> = idx.iter().map(|&i| points.point(i)).collect();
            let ws: Vec<f64> = idx.iter().map(|&i| points.weight(i)).collect();
            flats[c] = best_l2_flat(&pts, &ws, j).flat;
        }
        let (l, next) = assign_flats(points, &flats, cfg);
        labels = l;
        if next < best.0 {
            best = (next, flats.clone());
        }
        let improved = current - next;
        current = next;
        if improved <= tol * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    best
}
