//! Fitters that produce the (approximately) optimal shape the sensitivity
//! bounds are anchored to, plus an exact enumeration fitter for tiny inputs.

mod center;
mod exact;
mod flats;
mod kcenters;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::Shape;

pub use center::{geometric_median, weighted_centroid, zpower_center};
pub use exact::{exact_fit, MAX_EXACT_POINTS};
pub(crate) use exact::cluster_optimum;
pub use flats::{fit_jflat, fit_kjflats, fit_klines};
pub use kcenters::{fit_kcenters, lloyd};

/// A projective-clustering family together with its size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    KCenters { k: usize },
    KLines { k: usize },
    JFlat { j: usize },
    KJFlats { j: usize, k: usize },
}

impl Family {
    /// Parses a CLI-style family name with its parameters.
    pub fn from_name(name: &str, j: usize, k: usize) -> Result<Family> {
        match name {
            "kcenters" | "kmeans" | "kmedian" => Ok(Family::KCenters { k }),
            "klines" => Ok(Family::KLines { k }),
            "jflat" => Ok(Family::JFlat { j }),
            "kjflats" => Ok(Family::KJFlats { j, k }),
            other => Err(Error::input(format!("unknown family `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::KCenters { .. } => "kcenters",
            Family::KLines { .. } => "klines",
            Family::JFlat { .. } => "jflat",
            Family::KJFlats { .. } => "kjflats",
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Family::KCenters { k } | Family::KLines { k } | Family::KJFlats { k, .. } => k,
            Family::JFlat { .. } => 1,
        }
    }

    pub fn j(&self) -> usize {
        match *self {
            Family::KCenters { .. } => 0,
            Family::KLines { .. } => 1,
            Family::JFlat { j } | Family::KJFlats { j, .. } => j,
        }
    }

    /// Family whose shapes have the same variant as `shape`.
    pub fn of_shape(shape: &Shape) -> Family {
        match shape {
            Shape::KPoints { .. } => Family::KCenters { k: shape.k() },
            Shape::KLines { .. } => Family::KLines { k: shape.k() },
            Shape::JFlat(f) => Family::JFlat { j: f.dim() },
            Shape::KJFlats(_) => Family::KJFlats { j: shape.j(), k: shape.k() },
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.k() == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if self.j() >= d {
            return Err(Error::input(format!("j = {} must be at most d-1 = {}", self.j(), d - 1)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    KMeansLloyd,
    KMedianWeiszfeld,
    KCentersLocalSearch,
    FlatSvd,
    FlatsAlternating,
    Exact,
}

/// Shape returned by a fitter together with its cost and claimed slack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub shape: Shape,
    pub cost: f64,
    /// Multiplicative guarantee `c >= 1` relative to the optimum (or a conservative estimate).
    pub approx_factor: f64,
    pub method: FitMethod,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative cost improvement of one iteration falls below this.
    pub tol: f64,
    pub seed: u64,
    /// Overrides the fitter's default approximation factor.
    pub approx_factor: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { restarts: 10, max_iter: 100, tol: 1e-9, seed: 0, approx_factor: None }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        FitOptions { seed, ..Default::default() }
    }

    fn factor_or(&self, default: f64) -> Result<f64> {
        match self.approx_factor {
            Some(c) if !(c.is_finite() && c >= 1.0) => {
                Err(Error::input(format!("approximation factor must be >= 1, got {c}")))
            }
            Some(c) => Ok(c),
            None => Ok(default),
        }
    }
}

/// Independent RNG stream for restart `index` under `seed`.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fits any family with the default heuristic for it.
pub fn fit(
    points: &crate::PointSet,
    family: Family,
    cfg: &crate::DistanceConfig,
    opts: &FitOptions,
) -> Result<FitResult> {
    family.validate(points.dim())?;
    match family {
        Family::KCenters { k } => fit_kcenters(points, k, cfg, opts),
        Family::KLines { k } => fit_klines(points, k, cfg, opts),
        Family::JFlat { j } => fit_jflat(points, j, cfg, opts),
        Family::KJFlats { j, k } => fit_kjflats(points, j, k, cfg, opts),
    }
}

/// Picks the lowest-cost run, breaking ties by run index.
pub(crate) fn best_of<T>(runs: Vec<(f64, T)>) -> Option<(f64, T)> {
    let mut best: Option<(f64, T)> = None;
    for (c, t) in runs {
        match &best {
            Some((bc, _)) if !(c < *bc) => {}
            _ => best = Some((c, t)),
        }
    }
    best
}
