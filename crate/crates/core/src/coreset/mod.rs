//! Sensitivity sampling: size planning, i.i.d. draws, floor mixing and
//! empirical evaluation.

mod evaluate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::Family;
use crate::geometry::{DistanceConfig, PointSet};
use crate::linalg::pairwise_sum;
use crate::sensitivity::SensitivityProfile;
use crate::shape::Shape;

pub use evaluate::{evaluate, EvalOptions, EvalReport};

/// Floor weight applied to lower-estimate profiles before sampling.
pub const DEFAULT_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetPlan {
    pub epsilon: f64,
    pub total: f64,
    pub dim_estimate: usize,
    pub size_constant: f64,
    /// `ceil(C (T/eps)^2 dim)`, clamped to `[1, n]`.
    pub size: usize,
}

/// `(j+1) d k`, the default dimension estimate.
pub fn default_dim(family: Family, d: usize) -> usize {
    (family.j() + 1) * d * family.k()
}

/// Sample size `ceil(C (T/eps)^2 dim)`, capped at `n`.
pub fn plan_size(epsilon: f64, total: f64, n: usize, dim_estimate: usize, size_constant: f64) -> Result<CoresetPlan> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(size_constant > 0.0 && size_constant.is_finite()) {
        return Err(Error::input(format!("size constant must be positive, got {size_constant}")));
    }
    if !(total >= 0.0 && total.is_finite()) || n == 0 {
        return Err(Error::input("plan needs a finite total and a non-empty input"));
    }
    let raw = (size_constant * (total / epsilon).powi(2) * dim_estimate as f64).ceil();
    let size = if raw >= n as f64 { n } else { (raw as usize).max(1) };
    Ok(CoresetPlan { epsilon, total, dim_estimate, size_constant, size })
}

/// Plan from a profile's (clamped) total.
pub fn plan_for(epsilon: f64, profile: &SensitivityProfile, dim_estimate: usize, size_constant: f64) -> Result<CoresetPlan> {
    plan_size(epsilon, profile.total, profile.len(), dim_estimate, size_constant)
}

/// Weighted subset of the input: `indices` lists every draw (with repeats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coreset {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub plan: CoresetPlan,
    pub seed: u64,
}

impl Coreset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The coreset as a weighted point set (one row per draw, ids of the source points).
    pub fn to_point_set(&self, points: &PointSet) -> Result<PointSet> {
        self.check_structure(points)?;
        let d = points.dim();
        let mut coords = Vec::with_capacity(self.len() * d);
        for &i in &self.indices {
            coords.extend_from_slice(points.point(i));
        }
        let ids = self.indices.iter().map(|&i| points.ids()[i]).collect();
        PointSet::new(coords, d)?.with_weights(self.weights.clone())?.with_ids(ids)
    }

    /// `dist(S, F)`.
    pub fn cost(&self, points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Result<f64> {
        crate::geometry::cost(&self.to_point_set(points)?, shape, cfg)
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// S is a subset of P with strictly positive finite weights.
    pub fn check_structure(&self, points: &PointSet) -> Result<()> {
        if self.indices.len() != self.weights.len() {
            return Err(Error::input("coreset indices and weights differ in length"));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i >= points.len()) {
            return Err(Error::input(format!("coreset index {i} outside a set of {} points", points.len())));
        }
        if let Some(w) = self.weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::input(format!("coreset weight {w} is not positive")));
        }
        Ok(())
    }
}

/// Draws `plan.size` points i.i.d. with probability `s(p)/T`, each with
/// weight `w_p T / (m s(p))`, so `E[dist(S, F)] = dist(P, F)` for every F.
///
/// Profiles of lower estimates must be floor-mixed first.
pub fn draw(points: &PointSet, profile: &SensitivityProfile, plan: &CoresetPlan, seed: u64) -> Result<Coreset> {
    if profile.len() != points.len() {
        return Err(Error::input(format!(
            "profile has {} entries for {} points",
            profile.len(),
            points.len()
        )));
    }
    if profile.flags.lower_bound && !profile.flags.floor_mixed {
        return Err(Error::input("profile holds lower estimates; mix in a uniform floor before sampling"));
    }
    let s = &profile.bounds;
    if let Some(x) = s.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::input(format!("every sampling bound must be positive, found {x}")));
    }
    let total = pairwise_sum(s);
    if !(total > 0.0) {
        return Err(Error::input("profile total is zero"));
    }
    let m = plan.size.max(1);
    let alias = WeightedAliasIndex::new(s.clone()).map_err(|e| Error::input(format!("bad sampling weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..m).map(|_| alias.sample(&mut rng)).collect();
    let weights: Vec<f64> = indices.iter().map(|&i| points.weight(i) * total / (m as f64 * s[i])).collect();
    let c = Coreset { indices, weights, plan: plan.clone(), seed };
    assert!(c.check_structure(points).is_ok(), "sampled coreset must be a positively weighted subset");
    Ok(c)
}

/// `s'(p) = (1 - gamma) s(p) + gamma w_p / W`: every point keeps at least
/// `gamma w_p / W`, so sampling stays unbiased with bounded weights.
pub fn mix_floor(points: &PointSet, profile: &SensitivityProfile, gamma: f64) -> Result<SensitivityProfile> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::input(format!("floor weight must lie in (0, 1], got {gamma}")));
    }
    if profile.len() != points.len() {
        return Err(Error::input("profile and point set differ in length"));
    }
    let w_total = points.total_weight();
    let mix = |v: &[f64]| -> Vec<f64> {
        v.iter().zip(points.weights()).map(|(s, w)| (1.0 - gamma) * s + gamma * w / w_total).collect()
    };
    let raw = mix(&profile.raw_bounds);
    let mut out = SensitivityProfile::from_raw(
        points,
        raw,
        profile.method,
        profile.flags,
        profile.fit.clone(),
        profile.reduction_dim,
    );
    out.ids = profile.ids.clone();
    out.flags.floor_mixed = true;
    Ok(out)
}

/// Profile that makes `draw` sample proportionally to weight.
pub fn uniform_profile(points: &PointSet) -> SensitivityProfile {
    let w = points.total_weight();
    let raw = points.weights().iter().map(|x| x / w).collect();
    SensitivityProfile::from_raw(
        points,
        raw,
        crate::sensitivity::SensitivityMethod::Uniform,
        Default::default(),
        None,
        None,
    )
}
