use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::reduce::reduce;
use super::{lift_bounds, ProfileFlags, SensitivityMethod, SensitivityProfile};
use crate::error::{Error, Result};
use crate::fit::{fit, stream_rng, Family, FitOptions, FitResult};
use crate::geometry::{residuals_unchecked, weighted_sum, DistanceConfig, PointSet};
use crate::shape::Shape;
use crate::shapegen::{perturb, random_shape, shape_through_points};

#[derive(Debug, Clone)]
pub struct EmpiricalOptions {
    /// Number of global candidate shapes: random, through data points, and
    /// fitted to random subsets, in rotation.
    pub budget: usize,
    /// (1+1)-ES steps spent on each ascended location.
    pub ascent_steps: usize,
    /// How many distinct locations get a local ascent (highest estimates first).
    pub ascent_points: usize,
    pub seed: u64,
    /// Shapes always evaluated in addition to the generated ones.
    pub extra_candidates: Vec<Shape>,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        EmpiricalOptions { budget: 256, ascent_steps: 40, ascent_points: 64, seed: 0, extra_candidates: Vec::new() }
    }
}

/// Tracks, per distinct location x, the best `dist(x, F) / dist(P, F)` seen.
/// Coincident points share a location, so they always get equal values per
/// unit weight.
pub(crate) struct Scorer<'a> {
    points: &'a PointSet,
    cfg: &'a DistanceConfig,
    loc_of: Vec<usize>,
    reps: Vec<usize>,
    best: Vec<f64>,
    arg: Vec<Option<Shape>>,
    scale: f64,
}

impl<'a> Scorer<'a> {
    pub fn new(points: &'a PointSet, cfg: &'a DistanceConfig) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut reps = Vec::new();
        let loc_of = points
            .points()
            .enumerate()
            .map(|(i, p)| {
                // +0.0 normalizes -0.0 so equal coordinates share a key.
                let key: Vec<u64> = p.iter().map(|x| (x + 0.0).to_bits()).collect();
                *index.entry(key).or_insert_with(|| {
                    reps.push(i);
                    reps.len() - 1
                })
            })
            .collect();
        let nl = reps.len();
        Scorer {
            points,
            cfg,
            loc_of,
            reps,
            best: vec![0.0; nl],
            arg: vec![None; nl],
            scale: points.diameter().max(1e-12),
        }
    }

    pub fn locations(&self) -> usize {
        self.reps.len()
    }

    /// Per-location ratios for `shape`; all zero when `shape` fits P exactly.
    pub fn ratios(&self, shape: &Shape) -> Vec<f64> {
        let r = residuals_unchecked(self.points, shape, self.cfg);
        let cost = weighted_sum(self.points, &r);
        if cost <= 0.0 {
            return vec![0.0; self.reps.len()];
        }
        self.reps.iter().map(|&i| r[i] / cost).collect()
    }

    fn ratio_at(&self, shape: &Shape, loc: usize) -> f64 {
        let r = residuals_unchecked(self.points, shape, self.cfg);
        let cost = weighted_sum(self.points, &r);
        if cost <= 0.0 {
            0.0
        } else {
            r[self.reps[loc]] / cost
        }
    }

    pub fn merge(&mut self, values: &[f64], shape: &Shape) {
        for (l, &v) in values.iter().enumerate() {
            if v > self.best[l] {
                self.best[l] = v;
                self.arg[l] = Some(shape.clone());
            }
        }
    }

    pub fn observe(&mut self, shape: &Shape) {
        let v = self.ratios(shape);
        self.merge(&v, shape);
    }

    /// Evaluates shapes in parallel and merges them in list order.
    pub fn observe_all(&mut self, shapes: &[Shape]) {
        let vals: Vec<Vec<f64>> = shapes.par_iter().map(|s| self.ratios(s)).collect();
        for (v, s) in vals.iter().zip(shapes) {
            self.merge(v, s);
        }
    }

    /// (1+1)-ES on `F -> ratio(x_loc, F)` with a one-fifth success rule.
    fn ascend<R: Rng>(&self, loc: usize, start: Shape, steps: usize, rng: &mut R) -> (f64, Shape) {
        let mut cur = start;
        let mut val = self.ratio_at(&cur, loc);
        let mut step = 0.1 * self.scale;
        for _ in 0..steps {
            let cand = perturb(&cur, step, self.scale, rng);
            let v = self.ratio_at(&cand, loc);
            if v > val {
                cur = cand;
                val = v;
                step *= 1.5;
            } else {
                step *= 0.9036; // 1.5^(-1/4)
            }
            if step < 1e-14 * self.scale {
                step = 1e-3 * self.scale;
            }
        }
        (val, cur)
    }

    /// Local ascent for each listed location, started from its best shape so
    /// far plus `random_starts` fresh shapes; results are merged for all
    /// locations in list order.
    pub fn ascend_locations(&mut self, locs: &[usize], family: Family, steps: usize, random_starts: usize, seed: u64) {
        if steps == 0 {
            return;
        }
        let found: Vec<Vec<Shape>> = locs
            .par_iter()
            .map(|&l| {
                let mut rng = stream_rng(seed, 1 + l as u64);
                let mut starts: Vec<Shape> = self.arg[l].iter().cloned().collect();
                for r in 0..random_starts {
                    starts.push(if r % 2 == 0 {
                        random_shape(family, self.points, &mut rng)
                    } else {
                        shape_through_points(family, self.points, &mut rng)
                    });
                }
                starts.into_iter().map(|s| self.ascend(l, s, steps, &mut rng).1).collect()
            })
            .collect();
        for shapes in found {
            for s in &shapes {
                self.observe(s);
            }
        }
    }

    /// `w_p * best(x_p)` for every point.
    pub fn values(&self) -> Vec<f64> {
        self.loc_of.iter().zip(self.points.weights()).map(|(&l, w)| (w * self.best[l]).min(1.0)).collect()
    }

    pub fn best(&self) -> &[f64] {
        &self.best
    }
}

/// Search-based lower estimate of every point's sensitivity.
///
/// Every value is attained by an explicit shape, so it never exceeds the true
/// sensitivity; the profile is flagged `lower_bound`.
pub fn sens_empirical(
    points: &PointSet,
    family: Family,
    cfg: &DistanceConfig,
    opts: &EmpiricalOptions,
) -> Result<SensitivityProfile> {
    if opts.budget == 0 {
        return Err(Error::input("empirical sensitivity needs a positive candidate budget"));
    }
    family.validate(points.dim())?;
    for s in &opts.extra_candidates {
        if s.ambient_dim() != points.dim() {
            return Err(Error::DimensionMismatch { expected: points.dim(), got: s.ambient_dim() });
        }
    }
    let n = points.len();
    let mut rng = stream_rng(opts.seed, 0);
    let mut shapes = opts.extra_candidates.clone();
    let min_subset = (family.k() * (family.j() + 1)).clamp(1, n);
    for b in 0..opts.budget {
        let shape = match b % 3 {
            0 => random_shape(family, points, &mut rng),
            1 => shape_through_points(family, points, &mut rng),
            _ => {
                let size = rng.gen_range(min_subset..=n);
                let mut idx = sample(&mut rng, n, size).into_vec();
                idx.sort_unstable();
                let fo = FitOptions { restarts: 1, max_iter: 20, seed: rng.gen(), ..FitOptions::default() };
                match fit(&points.subset(&idx), family, cfg, &fo) {
                    Ok(r) => r.shape,
                    Err(_) => shape_through_points(family, points, &mut rng),
                }
            }
        };
        shapes.push(shape);
    }
    let mut scorer = Scorer::new(points, cfg);
    scorer.observe_all(&shapes);

    let mut order: Vec<usize> = (0..scorer.locations()).collect();
    order.sort_by(|&a, &b| scorer.best()[b].total_cmp(&scorer.best()[a]).then(a.cmp(&b)));
    order.truncate(opts.ascent_points);
    order.sort_unstable();
    scorer.ascend_locations(&order, family, opts.ascent_steps, 0, opts.seed);

    let flags = ProfileFlags { lower_bound: true, ..Default::default() };
    Ok(SensitivityProfile::from_raw(points, scorer.values(), SensitivityMethod::EmpiricalAdversarial, flags, None, None))
}

/// Route for k lines / k flats, which have no constructive bound: estimate
/// sensitivities of the reduced projected instance empirically and lift them.
/// The result is not certified and is flagged `lower_bound`.
pub fn sens_projective(
    points: &PointSet,
    fit: &FitResult,
    cfg: &DistanceConfig,
    opts: &EmpiricalOptions,
) -> Result<SensitivityProfile> {
    let (proj, red) = reduce(points, &fit.shape, cfg)?;
    let family = Family::of_shape(&fit.shape);
    let inner = EmpiricalOptions { extra_candidates: Vec::new(), ..opts.clone() };
    let reduced = sens_empirical(&red.points, family, cfg, &inner)?;
    let raw = lift_bounds(points, &proj.residuals, &reduced.bounds, fit.approx_factor, cfg);
    let flags = ProfileFlags { lower_bound: true, ..Default::default() };
    Ok(SensitivityProfile::from_raw(
        points,
        raw,
        SensitivityMethod::EmpiricalAdversarial,
        flags,
        Some(fit.clone()),
        Some(red.dim()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensitivity::{lowerbound_instance, lowerbound_ratio};

    #[test]
    fn zero_budget_is_input_error() {
        let p = PointSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let cfg = DistanceConfig::new(2.0).unwrap();
        let opts = EmpiricalOptions { budget: 0, ..Default::default() };
        assert!(matches!(sens_empirical(&p, Family::KCenters { k: 1 }, &cfg, &opts), Err(Error::Input(_))));
    }

    #[test]
    fn duplicates_get_equal_values() {
        let p = PointSet::from_rows(&[vec![0.0, 1.0], vec![3.0, 1.0], vec![0.0, 1.0], vec![5.0, -2.0], vec![1.0, 1.0]])
            .unwrap();
        let cfg = DistanceConfig::new(2.0).unwrap();
        let prof = sens_empirical(&p, Family::KLines { k: 1 }, &cfg, &EmpiricalOptions::default()).unwrap();
        assert_eq!(prof.bounds[0], prof.bounds[2]);
        assert!(prof.flags.lower_bound);
        assert!(prof.bounds.iter().all(|&s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn lowerbound_shapes_certify_harmonic_growth() {
        let n = 24;
        let (p, shapes) = lowerbound_instance(n).unwrap();
        let cfg = DistanceConfig::new(1.0).unwrap();
        let opts = EmpiricalOptions { budget: 30, ascent_points: 0, extra_candidates: shapes, ..Default::default() };
        let prof = sens_empirical(&p, Family::KLines { k: 2 }, &cfg, &opts).unwrap();
        let harmonic: f64 = (1..=n).map(|i| 1.0 / (2 + i) as f64).sum();
        assert!(prof.total >= harmonic);
        for i in 0..n {
            assert!(prof.bounds[i] >= lowerbound_ratio(n, i + 1) * (1.0 - 1e-12));
        }
    }
}
