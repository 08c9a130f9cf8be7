//! Point sets, z-power Euclidean distances, projections and instance costs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::shape::Shape;

/// Below this many point-constituent-coordinate products, work stays on one thread.
const PAR_THRESHOLD: usize = 1 << 16;

/// `n` weighted points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    d: usize,
    weights: Vec<f64>,
    ids: Vec<usize>,
}

impl PointSet {
    /// Unit-weighted points from a row-major buffer.
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if coords.is_empty() || coords.len() % d != 0 {
            return Err(Error::input(format!(
                "coordinate buffer of length {} does not hold a positive number of {d}-dimensional points",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("coordinates must be finite"));
        }
        let n = coords.len() / d;
        Ok(PointSet { coords, d, weights: vec![1.0; n], ids: (0..n).collect() })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        PointSet::new(rows.concat(), d)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::input(format!(
                "expected {} weights, got {}",
                self.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::input("weights must be finite and strictly positive"));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<usize>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::input("id count does not match point count"));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Points at `indices` (repetition allowed), keeping weights and ids.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            coords,
            d: self.d,
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    /// Per-coordinate bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.d];
        let mut hi = vec![f64::NEG_INFINITY; self.d];
        for p in self.points() {
            for (c, &x) in p.iter().enumerate() {
                lo[c] = lo[c].min(x);
                hi[c] = hi[c].max(x);
            }
        }
        (lo, hi)
    }

    /// Diagonal length of the bounding box (0 for a single repeated point).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    /// Applies `f` to every point, keeping weights and ids.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<PointSet> {
        let rows: Vec<Vec<f64>> = self.points().map(f).collect();
        let d = rows[0].len();
        let mut out = PointSet::from_rows(&rows)?;
        debug_assert_eq!(out.d, d);
        out.weights = self.weights.clone();
        out.ids = self.ids.clone();
        Ok(out)
    }
}

/// Exponent `z` of the z-power Euclidean distance and its relaxed-triangle constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    pub z: f64,
    pub alpha: f64,
}

impl DistanceConfig {
    /// `z >= 1`, with `alpha = 2^(z-1)`.
    pub fn new(z: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 1.0) {
            return Err(Error::input(format!("z must be a finite real >= 1, got {z}")));
        }
        Ok(DistanceConfig { z, alpha: (z - 1.0).exp2() })
    }

    /// Experimental `z in (0, 1)`, where the plain triangle inequality holds (`alpha = 1`).
    pub fn experimental(z: f64) -> Result<Self> {
        if z >= 1.0 {
            return DistanceConfig::new(z);
        }
        if !(z > 0.0) {
            return Err(Error::input(format!("z must be positive, got {z}")));
        }
        Ok(DistanceConfig { z, alpha: 1.0 })
    }

    pub fn is_experimental(&self) -> bool {
        self.z < 1.0
    }

    /// Converts a squared Euclidean distance into the z-power distance.
    #[inline]
    pub fn from_sq(&self, sq: f64) -> f64 {
        if self.z == 2.0 {
            sq
        } else if self.z == 1.0 {
            sq.sqrt()
        } else {
            sq.powf(self.z / 2.0)
        }
    }
}

/// Result of projecting every point of a set onto a shape.
#[derive(Debug, Clone)]
pub struct Projection {
    pub projected: PointSet,
    /// Index of the nearest constituent for each point.
    pub assignment: Vec<usize>,
    /// z-power distance from each point to the shape.
    pub residuals: Vec<f64>,
}

fn check_dim(p_dim: usize, shape: &Shape) -> Result<()> {
    let sd = shape.ambient_dim();
    if sd != p_dim {
        return Err(Error::DimensionMismatch { expected: sd, got: p_dim });
    }
    Ok(())
}

/// `dist(p, F)`: z-power Euclidean distance from `p` to the nearest point of `F`.
pub fn dist_point_shape(p: &[f64], shape: &Shape, cfg: &DistanceConfig) -> Result<f64> {
    check_dim(p.len(), shape)?;
    Ok(cfg.from_sq(shape.nearest(p).1))
}

/// Unweighted z-power distances of all points (no dimension check).
pub(crate) fn residuals_unchecked(points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Vec<f64> {
    let work = points.len() * shape.k() * points.dim().max(1);
    if work < PAR_THRESHOLD {
        points.points().map(|p| cfg.from_sq(shape.nearest(p).1)).collect()
    } else {
        (0..points.len())
            .into_par_iter()
            .map(|i| cfg.from_sq(shape.nearest(points.point(i)).1))
            .collect()
    }
}

/// Per-point z-power distances to `shape` (unweighted).
pub fn residuals(points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Result<Vec<f64>> {
    check_dim(points.dim(), shape)?;
    Ok(residuals_unchecked(points, shape, cfg))
}

/// Weighted sum of already computed per-point distances.
pub fn weighted_sum(points: &PointSet, dists: &[f64]) -> f64 {
    let terms: Vec<f64> = dists.iter().zip(points.weights()).map(|(r, w)| r * w).collect();
    pairwise_sum(&terms)
}

/// Projects every point onto its nearest constituent of `shape`.
///
/// Ties go to the lowest constituent index.
pub fn project_set(points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Result<Projection> {
    check_dim(points.dim(), shape)?;
    let projected_rows: Vec<(usize, Vec<f64>, f64)> =
        if points.len() * shape.k() * points.dim() < PAR_THRESHOLD {
            points.points().map(|p| shape.project(p)).collect()
        } else {
            (0..points.len()).into_par_iter().map(|i| shape.project(points.point(i))).collect()
        };
    let mut coords = Vec::with_capacity(points.len() * points.dim());
    let mut assignment = Vec::with_capacity(points.len());
    let mut residuals = Vec::with_capacity(points.len());
    for (idx, q, sq) in projected_rows {
        coords.extend(q);
        assignment.push(idx);
        residuals.push(cfg.from_sq(sq));
    }
    let projected = PointSet::new(coords, points.dim())?
        .with_weights(points.weights().to_vec())?
        .with_ids(points.ids().to_vec())?;
    Ok(Projection { projected, assignment, residuals })
}

/// `dist(P, F) = sum_p w_p dist(p, F)`.
pub fn cost(points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Result<f64> {
    let r = residuals(points, shape, cfg)?;
    Ok(weighted_sum(points, &r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Flat;

    fn two() -> DistanceConfig {
        DistanceConfig::new(2.0).unwrap()
    }

    #[test]
    fn alpha_is_two_to_z_minus_one() {
        assert_eq!(DistanceConfig::new(1.0).unwrap().alpha, 1.0);
        assert_eq!(DistanceConfig::new(2.0).unwrap().alpha, 2.0);
        assert_eq!(DistanceConfig::new(3.0).unwrap().alpha, 4.0);
        assert!(DistanceConfig::new(0.5).is_err());
        assert_eq!(DistanceConfig::experimental(0.5).unwrap().alpha, 1.0);
        assert!(DistanceConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn point_to_center_pythagoras() {
        let f = Shape::kpoints(vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(dist_point_shape(&[0.0, 0.0], &f, &two()).unwrap(), 25.0);
    }

    #[test]
    fn point_to_pair_of_lines() {
        let f = Shape::klines(vec![
            Flat::line(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap(),
            Flat::line(vec![0.0, 0.5], vec![1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let cfg = DistanceConfig::new(1.0).unwrap();
        assert_eq!(dist_point_shape(&[1.0, 0.0], &f, &cfg).unwrap(), 0.5);
        assert_eq!(dist_point_shape(&[0.0, 7.0], &f, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let f = Shape::kpoints(vec![vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            dist_point_shape(&[0.0, 0.0, 0.0], &f, &two()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn project_onto_x_axis() {
        let p = PointSet::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let f = Shape::jflat(Flat::line(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap()).unwrap();
        let pr = project_set(&p, &f, &two()).unwrap();
        assert_eq!(pr.projected.point(0), &[1.0, 0.0]);
        assert_eq!(pr.residuals, vec![1.0]);
    }

    #[test]
    fn four_point_instance_projection_and_cost() {
        let p = PointSet::from_rows(&[
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![10.0, 0.0],
            vec![12.0, 0.0],
        ])
        .unwrap();
        let f = Shape::kpoints(vec![vec![1.0, 0.0], vec![11.0, 0.0]]).unwrap();
        let pr = project_set(&p, &f, &two()).unwrap();
        assert_eq!(pr.assignment, vec![0, 0, 1, 1]);
        assert_eq!(pr.residuals, vec![1.0; 4]);
        assert_eq!(cost(&p, &f, &two()).unwrap(), 4.0);
        let doubled = p.clone().with_weights(vec![2.0; 4]).unwrap();
        assert_eq!(cost(&doubled, &f, &two()).unwrap(), 8.0);
    }

    #[test]
    fn points_on_shape_cost_zero() {
        let p = PointSet::from_rows(&[vec![1.0, 0.0], vec![-3.0, 0.0]]).unwrap();
        let f = Shape::jflat(Flat::line(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap()).unwrap();
        let pr = project_set(&p, &f, &two()).unwrap();
        assert_eq!(pr.projected, p);
        assert_eq!(cost(&p, &f, &two()).unwrap(), 0.0);
    }

    #[test]
    fn invalid_point_sets_rejected() {
        assert!(PointSet::new(vec![], 2).is_err());
        assert!(PointSet::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(PointSet::new(vec![f64::NAN, 0.0], 2).is_err());
        let p = PointSet::new(vec![0.0, 0.0], 2).unwrap();
        assert!(p.clone().with_weights(vec![0.0]).is_err());
        assert!(p.with_weights(vec![-1.0]).is_err());
    }
}
