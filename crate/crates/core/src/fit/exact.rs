//! Exact optimum by enumerating every partition of the input into at most k
//! clusters and fitting each cluster optimally. Test-oracle scale only.

use super::center::{center_cost, geometric_median, weighted_centroid};
use super::flats::best_l2_flat;
use super::{fit_jflat, Family, FitMethod, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::geometry::{cost, DistanceConfig, PointSet};
use crate::shape::{Flat, Shape};

pub const MAX_EXACT_POINTS: usize = 14;

/// Exact fit for kcenters (z in {1, 2}), klines / kjflats (z = 2) and jflat (z = 2).
pub fn exact_fit(points: &PointSet, family: Family, cfg: &DistanceConfig) -> Result<FitResult> {
    family.validate(points.dim())?;
    let n = points.len();
    match family {
        Family::JFlat { j } => {
            if cfg.z != 2.0 {
                return Err(Error::capability("exact j-flat fitting is only available for z = 2"));
            }
            let opts = FitOptions { approx_factor: Some(1.0), ..FitOptions::default() };
            let mut r = fit_jflat(points, j, cfg, &opts)?;
            r.method = FitMethod::Exact;
            return Ok(r);
        }
        Family::KCenters { .. } if cfg.z != 1.0 && cfg.z != 2.0 => {
            return Err(Error::capability("exact k-centers fitting needs z = 1 or z = 2"));
        }
        Family::KLines { .. } | Family::KJFlats { .. } if cfg.z != 2.0 => {
            return Err(Error::capability("exact flat fitting is only available for z = 2"));
        }
        _ => {}
    }
    if n > MAX_EXACT_POINTS {
        return Err(Error::capability(format!(
            "exact fitting enumerates partitions and supports n <= {MAX_EXACT_POINTS}, got {n}"
        )));
    }
    let k = family.k().min(n);
    let j = family.j();

    let mut search = Search {
        points,
        cfg,
        j,
        memo: vec![f64::NAN; 1 << n],
        best_cost: f64::INFINITY,
        best: Vec::new(),
    };
    let mut blocks = Vec::with_capacity(k);
    search.recurse(0, k, &mut blocks);

    let flats: Vec<Flat> = search.best.iter().map(|&m| search.optimum(m).1).collect();
    let shape = match family {
        Family::KCenters { .. } => Shape::kpoints(flats.into_iter().map(|f| f.anchor().to_vec()).collect())?,
        Family::KLines { .. } => Shape::klines(flats)?,
        _ => Shape::kjflats(flats)?,
    };
    let c = cost(points, &shape, cfg)?;
    Ok(FitResult { shape, cost: c, approx_factor: 1.0, method: FitMethod::Exact, seed: 0 })
}

/// Optimal single-constituent cost and constituent (a j-flat, or a center
/// when j = 0) for the points selected by the bit mask.
pub(crate) fn cluster_optimum(points: &PointSet, mask: u32, j: usize, cfg: &DistanceConfig) -> (f64, Flat) {
    let (pts, ws): (Vec<&[f64]>, Vec<f64>) =
        (0..points.len()).filter(|i| mask & (1 << i) != 0).map(|i| (points.point(i), points.weight(i))).unzip();
    if j == 0 {
        let mu = weighted_centroid(&pts, &ws);
        let c = if cfg.z == 2.0 { mu } else { geometric_median(&pts, &ws, &mu, 1e-12, 100_000) };
        let cost = center_cost(&pts, &ws, &c, cfg.z);
        (cost, Flat::point(c).expect("finite center"))
    } else {
        let l2 = best_l2_flat(&pts, &ws, j);
        (l2.sq_cost.max(0.0), l2.flat)
    }
}

struct Search<'a> {
    points: &'a PointSet,
    cfg: &'a DistanceConfig,
    j: usize,
    memo: Vec<f64>,
    best_cost: f64,
    best: Vec<u32>,
}

impl Search<'_> {
    fn optimum(&self, mask: u32) -> (f64, Flat) {
        cluster_optimum(self.points, mask, self.j, self.cfg)
    }

    fn cluster_cost(&mut self, mask: u32) -> f64 {
        let m = mask as usize;
        if self.memo[m].is_nan() {
            self.memo[m] = self.optimum(mask).0;
        }
        self.memo[m]
    }

    /// Restricted-growth enumeration; cluster costs only grow as points are
    /// added, so a partial sum already at the incumbent prunes the branch.
    fn recurse(&mut self, i: usize, k: usize, blocks: &mut Vec<u32>) {
        let partial: f64 = blocks.clone().into_iter().map(|b| self.cluster_cost(b)).sum();
        if partial >= self.best_cost {
            return;
        }
        if i == self.points.len() {
            self.best_cost = partial;
            self.best = blocks.clone();
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            self.recurse(i + 1, k, blocks);
            blocks[b] &= !(1 << i);
        }
        if blocks.len() < k {
            blocks.push(1 << i);
            self.recurse(i + 1, k, blocks);
            blocks.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> PointSet {
        PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![10.0, 0.0], vec![12.0, 0.0]]).unwrap()
    }

    #[test]
    fn four_point_exact_kmeans() {
        let cfg = DistanceConfig::new(2.0).unwrap();
        let r = exact_fit(&four(), Family::KCenters { k: 2 }, &cfg).unwrap();
        assert_eq!(r.cost, 4.0);
        assert_eq!(r.approx_factor, 1.0);
    }

    #[test]
    fn four_point_exact_kmedian() {
        let cfg = DistanceConfig::new(1.0).unwrap();
        let r = exact_fit(&four(), Family::KCenters { k: 2 }, &cfg).unwrap();
        assert!((r.cost - 4.0).abs() < 1e-9);
    }

    #[test]
    fn trivial_instances_cost_zero() {
        let cfg = DistanceConfig::new(2.0).unwrap();
        let one = PointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        for fam in [Family::KCenters { k: 1 }, Family::KLines { k: 1 }, Family::JFlat { j: 1 }] {
            assert_eq!(exact_fit(&one, fam, &cfg).unwrap().cost, 0.0);
        }
        let r = exact_fit(&four(), Family::KCenters { k: 4 }, &cfg).unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn unsupported_settings_are_capability_errors() {
        let cfg3 = DistanceConfig::new(3.0).unwrap();
        assert!(exact_fit(&four(), Family::KCenters { k: 2 }, &cfg3).unwrap_err().is_capability());
        let cfg1 = DistanceConfig::new(1.0).unwrap();
        assert!(exact_fit(&four(), Family::KLines { k: 1 }, &cfg1).unwrap_err().is_capability());
        let rows: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64, 0.0]).collect();
        let big = PointSet::from_rows(&rows).unwrap();
        let cfg2 = DistanceConfig::new(2.0).unwrap();
        assert!(exact_fit(&big, Family::KCenters { k: 2 }, &cfg2).unwrap_err().is_capability());
    }
}
