use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use super::center::{center_cost, geometric_median, weighted_centroid, zpower_center};
use super::{best_of, stream_rng, FitMethod, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::geometry::{cost, DistanceConfig, PointSet};
use crate::linalg::{pairwise_sum, sq_dist};
use crate::shape::Shape;

/// k centers by D^z seeding followed by Lloyd-style alternation, best of
/// `opts.restarts` runs.
///
/// The center step is the centroid for z = 2, the geometric median for z = 1
/// and a direct minimization of the z-power cost otherwise.
pub fn fit_kcenters(points: &PointSet, k: usize, cfg: &DistanceConfig, opts: &FitOptions) -> Result<FitResult> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::input(format!("k = {k} exceeds the number of points n = {}", points.len())));
    }
    let approx_factor = opts.factor_or(2.0)?;
    let restarts = opts.restarts.max(1);
    let runs: Vec<(f64, Vec<Vec<f64>>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(opts.seed, r as u64);
            let seeds = seed_centers(points, k, cfg, &mut rng);
            let (centers, c, _) = lloyd(points, seeds, cfg, opts.max_iter, opts.tol);
            (c, centers)
        })
        .collect();
    let (_, centers) = best_of(runs).expect("at least one restart");
    let shape = Shape::kpoints(centers)?;
    let cost = cost(points, &shape, cfg)?;
    let method = if cfg.z == 2.0 {
        FitMethod::KMeansLloyd
    } else if cfg.z == 1.0 {
        FitMethod::KMedianWeiszfeld
    } else {
        FitMethod::KCentersLocalSearch
    };
    Ok(FitResult { shape, cost, approx_factor, method, seed: opts.seed })
}

/// D^z seeding: each new center is a data point drawn with probability
/// proportional to `w_p * dist(p, chosen)`.
fn seed_centers<R: Rng>(points: &PointSet, k: usize, cfg: &DistanceConfig, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let first = WeightedIndex::new(points.weights()).expect("positive weights").sample(rng);
    let mut centers = vec![points.point(first).to_vec()];
    let mut chosen = vec![first];
    let mut d: Vec<f64> = points.points().map(|p| cfg.from_sq(sq_dist(p, &centers[0]))).collect();
    while centers.len() < k {
        let scores: Vec<f64> = d.iter().zip(points.weights()).map(|(x, w)| x * w).collect();
        let idx = match WeightedIndex::new(&scores) {
            Ok(dist) => dist.sample(rng),
            // Fewer distinct points than k: fall back to any unused index.
            Err(_) => (0..n).find(|i| !chosen.contains(i)).unwrap_or(0),
        };
        chosen.push(idx);
        let c = points.point(idx).to_vec();
        for (i, p) in points.points().enumerate() {
            d[i] = d[i].min(cfg.from_sq(sq_dist(p, &c)));
        }
        centers.push(c);
    }
    centers
}

fn assign(points: &PointSet, centers: &[Vec<f64>], cfg: &DistanceConfig) -> (Vec<usize>, Vec<f64>) {
    let pairs: Vec<(usize, f64)> = points
        .points()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (i, c) in centers.iter().enumerate() {
                let sq = sq_dist(p, c);
                if sq < best.1 {
                    best = (i, sq);
                }
            }
            (best.0, cfg.from_sq(best.1))
        })
        .collect();
    pairs.into_iter().unzip()
}

fn weighted_cost(points: &PointSet, dists: &[f64]) -> f64 {
    let terms: Vec<f64> = dists.iter().zip(points.weights()).map(|(d, w)| d * w).collect();
    pairwise_sum(&terms)
}

/// Lloyd-style alternation from the given centers.
///
/// Returns the final centers, their cost and the cost after every assignment
/// step; the history is non-increasing.
pub fn lloyd(
    points: &PointSet,
    mut centers: Vec<Vec<f64>>,
    cfg: &DistanceConfig,
    max_iter: usize,
    tol: f64,
) -> (Vec<Vec<f64>>, f64, Vec<f64>) {
    let k = centers.len();
    let (mut labels, mut dists) = assign(points, &centers, cfg);
    let mut current = weighted_cost(points, &dists);
    let mut history = vec![current];
    for _ in 0..max_iter {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        for (c, idx) in members.iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            let pts: Vec<&[f64]> = idx.iter().map(|&i| points.point(i)).collect();
            let ws: Vec<f64> = idx.iter().map(|&i| points.weight(i)).collect();
            let candidate = if cfg.z == 2.0 {
                weighted_centroid(&pts, &ws)
            } else if cfg.z == 1.0 {
                geometric_median(&pts, &ws, &centers[c], 1e-10, 1000)
            } else {
                zpower_center(&pts, &ws, &centers[c], cfg.z, 200)
            };
            if center_cost(&pts, &ws, &candidate, cfg.z) <= center_cost(&pts, &ws, &centers[c], cfg.z) {
                centers[c] = candidate;
            }
        }
        // Empty clusters move onto the currently worst-served points.
        let empty: Vec<usize> = (0..k).filter(|&c| members[c].is_empty()).collect();
        if !empty.is_empty() {
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| {
                (dists[b] * points.weight(b))
                    .partial_cmp(&(dists[a] * points.weight(a)))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for (c, &i) in empty.iter().zip(order.iter()) {
                centers[*c] = points.point(i).to_vec();
            }
        }
        let (l, d) = assign(points, &centers, cfg);
        labels = l;
        dists = d;
        let next = weighted_cost(points, &dists);
        history.push(next);
        let improved = current - next;
        current = next;
        if improved <= tol * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (centers, current, history)
}
