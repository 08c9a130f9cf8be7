//! Random, data-anchored and perturbed shapes for search-based estimators.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fit::Family;
use crate::geometry::PointSet;
use crate::linalg::orthonormalize;
use crate::shape::{Flat, Shape};

fn gaussian_vec<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_directions<R: Rng>(start: Vec<Vec<f64>>, d: usize, j: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut dirs = orthonormalize(&start, 1e-8);
    while dirs.len() < j {
        let mut all = dirs.clone();
        all.push(gaussian_vec(d, rng));
        dirs = orthonormalize(&all, 1e-8);
    }
    dirs.truncate(j);
    dirs
}

fn build(family: Family, flats: Vec<Flat>) -> Shape {
    let shape = match family {
        Family::KCenters { .. } => Shape::kpoints(flats.into_iter().map(|f| f.anchor().to_vec()).collect()),
        Family::KLines { .. } => Shape::klines(flats),
        Family::JFlat { .. } => Shape::jflat(flats.into_iter().next().expect("one flat")),
        Family::KJFlats { .. } => Shape::kjflats(flats),
    };
    shape.expect("generated shapes are valid")
}

/// Uniformly placed shape: anchors in the bounding box of `points` widened by
/// 10%, directions uniform on the sphere.
pub fn random_shape<R: Rng>(family: Family, points: &PointSet, rng: &mut R) -> Shape {
    let d = points.dim();
    let (lo, hi) = points.bounding_box();
    let pad = 0.1 * points.diameter().max(1e-12);
    let flats = (0..family.k())
        .map(|_| {
            let anchor: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.gen_range((a - pad)..=(b + pad))).collect();
            let dirs = random_directions(vec![], d, family.j(), rng);
            Flat::new(anchor, &dirs).expect("orthonormal")
        })
        .collect();
    build(family, flats)
}

/// Each constituent passes through `j+1` distinct data points where possible.
pub fn shape_through_points<R: Rng>(family: Family, points: &PointSet, rng: &mut R) -> Shape {
    let d = points.dim();
    let n = points.len();
    let j = family.j();
    let flats = (0..family.k())
        .map(|_| {
            let picks = sample(rng, n, (j + 1).min(n)).into_vec();
            let anchor = points.point(picks[0]).to_vec();
            let start: Vec<Vec<f64>> = picks[1..]
                .iter()
                .map(|&i| points.point(i).iter().zip(&anchor).map(|(a, b)| a - b).collect())
                .collect();
            let dirs = random_directions(start, d, j, rng);
            Flat::new(anchor, &dirs).expect("orthonormal")
        })
        .collect();
    build(family, flats)
}

/// Gaussian perturbation of every anchor (scale `step`) and every direction
/// (scale `step / scale`), re-orthonormalized.
pub fn perturb<R: Rng>(shape: &Shape, step: f64, scale: f64, rng: &mut R) -> Shape {
    let d = shape.ambient_dim();
    let rel = step / scale.max(1e-300);
    let flats: Vec<Flat> = shape
        .constituents()
        .into_iter()
        .map(|f| {
            let anchor: Vec<f64> =
                f.anchor().iter().map(|a| a + step * rng.sample::<f64, _>(StandardNormal)).collect();
            let start: Vec<Vec<f64>> = f
                .basis()
                .iter()
                .map(|b| b.iter().map(|x| x + rel * rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let dirs = random_directions(start, d, f.dim(), rng);
            Flat::new(anchor, &dirs).expect("orthonormal")
        })
        .collect();
    shape.with_constituents(flats).expect("perturbed shape keeps its variant")
}
