//! Per-point sensitivity upper bounds (and, where no bound is constructive,
//! search-based lower estimates).
//!
//! Sensitivities here are whole-point quantities: for a point `p` of weight
//! `w_p`, `sigma(p) = sup_F w_p dist(p, F) / dist(P, F)`, which lies in
//! `[0, 1]`. The total is the plain sum over points.

mod basis;
mod empirical;
mod kcenters;
mod lowerbound;
mod oracle;
mod reduce;
mod subspace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::geometry::{DistanceConfig, PointSet};
use crate::linalg::pairwise_sum;
use crate::shape::Shape;

pub use basis::{conditioned_basis, ConditionedBasis};
pub use empirical::{sens_empirical, sens_projective, EmpiricalOptions};
pub use kcenters::sens_kcenters;
pub use lowerbound::{
    harmonic_lower_bound, lowerbound_instance, lowerbound_ratio, lowerbound_ratios, lowerbound_total,
    MAX_REPRESENTABLE_N,
};
pub use oracle::{exact_sensitivity_oracle, OracleOptions};
pub use reduce::{reduce, ReducedInstance};
pub use subspace::sens_subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityMethod {
    KcentersClosedForm,
    SubspaceConditionedBasis,
    EmpiricalAdversarial,
    ExactOracle,
    /// Weight-proportional baseline, not a sensitivity bound.
    Uniform,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileFlags {
    /// Bounds are valid but carry a dimension- or n-dependent slack.
    pub loose: bool,
    /// Values are lower estimates of sensitivity, not certified upper bounds.
    pub lower_bound: bool,
    /// A uniform floor has been mixed in, making the profile safe to sample from.
    pub floor_mixed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityProfile {
    pub ids: Vec<usize>,
    /// Per-point values clamped to at most 1.
    pub bounds: Vec<f64>,
    /// Per-point values before clamping.
    pub raw_bounds: Vec<f64>,
    pub total: f64,
    pub raw_total: f64,
    pub method: SensitivityMethod,
    pub flags: ProfileFlags,
    pub fit: Option<FitResult>,
    /// Dimension m of the subspace the projected instance was expressed in.
    pub reduction_dim: Option<usize>,
}

impl SensitivityProfile {
    pub fn from_raw(
        points: &PointSet,
        raw_bounds: Vec<f64>,
        method: SensitivityMethod,
        flags: ProfileFlags,
        fit: Option<FitResult>,
        reduction_dim: Option<usize>,
    ) -> Self {
        let bounds: Vec<f64> = raw_bounds.iter().map(|&s| s.min(1.0)).collect();
        SensitivityProfile {
            ids: points.ids().to_vec(),
            total: pairwise_sum(&bounds),
            raw_total: pairwise_sum(&raw_bounds),
            bounds,
            raw_bounds,
            method,
            flags,
            fit,
            reduction_dim,
        }
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }
}

/// Lifts bounds on the projected instance to bounds on the original one.
///
/// With a fit of cost `cost` and slack `c`, each point gets
/// `c*alpha*w_p*dist(p,p')/cost + (1+c)*alpha^2*s'(p')`; when the fit has
/// zero cost the projected bound is used unchanged.
pub(crate) fn lift_bounds(
    points: &PointSet,
    residuals: &[f64],
    projected: &[f64],
    approx_factor: f64,
    cfg: &DistanceConfig,
) -> Vec<f64> {
    let terms: Vec<f64> = residuals.iter().zip(points.weights()).map(|(r, w)| r * w).collect();
    let cost = pairwise_sum(&terms);
    if cost == 0.0 {
        return projected.to_vec();
    }
    let a = cfg.alpha;
    let c = approx_factor;
    terms
        .iter()
        .zip(projected)
        .map(|(t, s)| c * a * t / cost + (1.0 + c) * a * a * s)
        .collect()
}

/// Sensitivity profile for a fitted shape, choosing the bound by family:
/// closed form for k centers, conditioned basis for a single flat, and the
/// reduced-instance empirical estimate for k lines / k flats.
pub fn compute(
    points: &PointSet,
    fit: &FitResult,
    cfg: &DistanceConfig,
    empirical: &EmpiricalOptions,
) -> Result<SensitivityProfile> {
    match &fit.shape {
        Shape::KPoints { .. } => sens_kcenters(points, fit, cfg),
        Shape::JFlat(_) => sens_subspace(points, fit, cfg),
        Shape::KLines { .. } | Shape::KJFlats(_) => sens_projective(points, fit, cfg, empirical),
    }
}

pub(crate) fn require_dim(points: &PointSet, shape: &Shape) -> Result<()> {
    if points.dim() != shape.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: shape.ambient_dim(), got: points.dim() });
    }
    Ok(())
}
