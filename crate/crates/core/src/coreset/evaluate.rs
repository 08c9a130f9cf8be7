use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit, stream_rng, Family, FitOptions};
use crate::geometry::{cost, DistanceConfig, PointSet};
use crate::shape::Shape;
use crate::shapegen::{perturb, random_shape, shape_through_points};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Random shapes, half uniform in the (padded) bounding box, half through data points.
    pub n_random: usize,
    /// Shapes fitted to random subsets of the input.
    pub n_subset: usize,
    /// Local ascents on the relative error, started from the worst shapes found.
    pub n_adversarial: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { n_random: 100, n_subset: 20, n_adversarial: 10, ascent_steps: 30, seed: 0 }
    }
}

/// Relative errors `|dist(P,F) - dist(S,F)| / dist(P,F)` over a shape ensemble.
/// Every number is a lower bound on the supremum over all shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub max_error: f64,
    pub max_random: f64,
    pub max_subset: f64,
    pub max_adversarial: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub shapes_evaluated: usize,
}

struct Pair<'a> {
    p: &'a PointSet,
    s: &'a PointSet,
    cfg: &'a DistanceConfig,
}

impl Pair<'_> {
    fn error(&self, shape: &Shape) -> f64 {
        let cp = cost(self.p, shape, self.cfg).expect("dimensions checked");
        let cs = cost(self.s, shape, self.cfg).expect("dimensions checked");
        if cp > 0.0 {
            (cp - cs).abs() / cp
        } else if cs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn errors(&self, shapes: &[Shape]) -> Vec<f64> {
        shapes.par_iter().map(|f| self.error(f)).collect()
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Empirical quality of the weighted set `coreset` as a stand-in for `points`.
///
/// The random and subset-fitted shapes depend only on `points` and the seed,
/// so two coresets of the same input evaluated with the same seed face the
/// same non-adaptive ensemble.
pub fn evaluate(
    points: &PointSet,
    coreset: &PointSet,
    family: Family,
    cfg: &DistanceConfig,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if coreset.dim() != points.dim() {
        return Err(Error::DimensionMismatch { expected: points.dim(), got: coreset.dim() });
    }
    family.validate(points.dim())?;
    let pair = Pair { p: points, s: coreset, cfg };
    let n = points.len();
    let mut rng = stream_rng(opts.seed, 0);

    let random: Vec<Shape> = (0..opts.n_random)
        .map(|i| {
            if i % 2 == 0 {
                random_shape(family, points, &mut rng)
            } else {
                shape_through_points(family, points, &mut rng)
            }
        })
        .collect();
    let lo = (family.k() * (family.j() + 1)).clamp(1, n);
    let hi = n.min(1000).max(lo);
    let subset: Vec<Shape> = (0..opts.n_subset)
        .map(|_| {
            let size = rng.gen_range(lo..=hi);
            let mut idx = sample(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            let fo = FitOptions { restarts: 1, max_iter: 10, seed: rng.gen(), ..FitOptions::default() };
            fit(&points.subset(&idx), family, cfg, &fo).map(|r| r.shape)
        })
        .collect::<Result<_>>()?;

    let e_random = pair.errors(&random);
    let e_subset = pair.errors(&subset);

    let mut pool: Vec<(f64, &Shape)> = e_random.iter().copied().zip(&random).chain(e_subset.iter().copied().zip(&subset)).collect();
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(opts.n_adversarial);
    let scale = points.diameter().max(1e-12);
    let e_adv: Vec<f64> = pool
        .par_iter()
        .enumerate()
        .map(|(i, &(e0, start))| {
            let mut rng = stream_rng(opts.seed, 1 + i as u64);
            let (mut cur, mut val) = (start.clone(), e0);
            let mut step = 0.05 * scale;
            for _ in 0..opts.ascent_steps {
                let cand = perturb(&cur, step, scale, &mut rng);
                let v = pair.error(&cand);
                if v > val {
                    cur = cand;
                    val = v;
                    step *= 1.5;
                } else {
                    step *= 0.9036;
                }
            }
            val
        })
        .collect();

    let mut all: Vec<f64> = e_random.iter().chain(&e_subset).chain(&e_adv).copied().collect();
    all.sort_by(f64::total_cmp);
    Ok(EvalReport {
        max_error: max_of(&all),
        max_random: max_of(&e_random),
        max_subset: max_of(&e_subset),
        max_adversarial: max_of(&e_adv),
        p50: quantile(&all, 0.5),
        p90: quantile(&all, 0.9),
        p99: quantile(&all, 0.99),
        shapes_evaluated: all.len(),
    })
}
