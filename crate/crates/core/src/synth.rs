//! Seeded synthetic instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::Family;
use crate::geometry::PointSet;
use crate::linalg::orthonormalize;
use crate::sensitivity::lowerbound_instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// k unit-variance Gaussians with means uniform in `[-separation, separation]^d`;
    /// cluster i gets a share proportional to `imbalance^i`.
    Mixture { imbalance: f64, separation: f64 },
    /// Points along k random lines with isotropic Gaussian noise.
    Lines { noise: f64 },
    /// Points on a random j-flat with isotropic Gaussian noise.
    FlatNoise { noise: f64 },
    /// Integer coordinates of magnitude at most `n^exponent`.
    IntegerGrid { exponent: f64 },
    /// Geometric sequence on the x-axis (d is ignored and fixed to 2).
    Lowerbound,
}

impl Generator {
    pub fn generate(&self, n: usize, d: usize, family: Family, seed: u64) -> Result<PointSet> {
        if n == 0 || d == 0 {
            return Err(Error::input("generators need n >= 1 and d >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            Generator::Mixture { imbalance, separation } => mixture(n, d, family.k(), imbalance, separation, &mut rng),
            Generator::Lines { noise } => flats(n, d, family.k(), 1, noise, &mut rng),
            Generator::FlatNoise { noise } => flats(n, d, 1, family.j(), noise, &mut rng),
            Generator::IntegerGrid { exponent } => integer_grid(n, d, exponent, &mut rng),
            Generator::Lowerbound => Ok(lowerbound_instance(n)?.0),
        }
    }
}

fn gaussian(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Cluster sizes proportional to `ratio^i`, each at least 1, summing to n.
fn sizes(n: usize, k: usize, ratio: f64) -> Vec<usize> {
    let k = k.min(n).max(1);
    let shares: Vec<f64> = (0..k).map(|i| ratio.powi(i as i32)).collect();
    let total: f64 = shares.iter().sum();
    let mut out: Vec<usize> = shares.iter().map(|s| ((s / total * n as f64).floor() as usize).max(1)).collect();
    while out.iter().sum::<usize>() > n {
        let big = (0..k).max_by_key(|&i| (out[i], std::cmp::Reverse(i))).unwrap();
        out[big] -= 1;
    }
    let short = n - out.iter().sum::<usize>();
    out[0] += short;
    out
}

pub fn mixture(n: usize, d: usize, k: usize, imbalance: f64, separation: f64, rng: &mut impl Rng) -> Result<PointSet> {
    if !(imbalance > 0.0 && imbalance <= 1.0) || !(separation >= 0.0) {
        return Err(Error::input("mixture needs imbalance in (0, 1] and separation >= 0"));
    }
    let mut coords = Vec::with_capacity(n * d);
    for size in sizes(n, k, imbalance) {
        let mean: Vec<f64> = (0..d).map(|_| rng.gen_range(-separation..=separation)).collect();
        for _ in 0..size {
            coords.extend(mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)));
        }
    }
    PointSet::new(coords, d)
}

pub fn flats(n: usize, d: usize, k: usize, j: usize, noise: f64, rng: &mut impl Rng) -> Result<PointSet> {
    if j >= d {
        return Err(Error::input(format!("flat dimension {j} must be below d = {d}")));
    }
    let noise = Normal::new(0.0, noise).map_err(|e| Error::input(format!("bad noise level: {e}")))?;
    let mut coords = Vec::with_capacity(n * d);
    for size in sizes(n, k, 1.0) {
        let anchor: Vec<f64> = gaussian(d, rng).iter().map(|x| 5.0 * x).collect();
        let mut dirs = Vec::new();
        while dirs.len() < j {
            let mut all: Vec<Vec<f64>> = dirs.clone();
            all.push(gaussian(d, rng));
            dirs = orthonormalize(&all, 1e-8);
        }
        for _ in 0..size {
            let mut p = anchor.clone();
            for b in &dirs {
                let t = rng.gen_range(-10.0..=10.0);
                p.iter_mut().zip(b).for_each(|(x, bi)| *x += t * bi);
            }
            p.iter_mut().for_each(|x| *x += noise.sample(rng));
            coords.extend(p);
        }
    }
    PointSet::new(coords, d)
}

pub fn integer_grid(n: usize, d: usize, exponent: f64, rng: &mut impl Rng) -> Result<PointSet> {
    if !(exponent >= 0.0) {
        return Err(Error::input("grid exponent must be non-negative"));
    }
    let bound = (n as f64).powf(exponent).floor().min(2f64.powi(52)) as i64;
    let coords = (0..n * d).map(|_| rng.gen_range(-bound..=bound) as f64).collect();
    PointSet::new(coords, d)
}
