use super::{lift_bounds, require_dim, ProfileFlags, SensitivityMethod, SensitivityProfile};
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::geometry::{project_set, DistanceConfig, PointSet};
use crate::shape::Shape;

/// Closed-form bound for k centers.
///
/// The projection onto k centers has at most k distinct locations, and the
/// sensitivity of a point sitting at a location of total weight `W_i` is
/// exactly `w_p / W_i`; the lift adds the residual share of each point.
pub fn sens_kcenters(points: &PointSet, fit: &FitResult, cfg: &DistanceConfig) -> Result<SensitivityProfile> {
    let Shape::KPoints { .. } = &fit.shape else {
        return Err(Error::input("closed-form bounds need a k-centers fit"));
    };
    require_dim(points, &fit.shape)?;
    let proj = project_set(points, &fit.shape, cfg)?;
    let mut cluster_weight = vec![0.0; fit.shape.k()];
    for (&a, w) in proj.assignment.iter().zip(points.weights()) {
        cluster_weight[a] += w;
    }
    let projected: Vec<f64> =
        proj.assignment.iter().zip(points.weights()).map(|(&a, w)| w / cluster_weight[a]).collect();
    let raw = lift_bounds(points, &proj.residuals, &projected, fit.approx_factor, cfg);
    Ok(SensitivityProfile::from_raw(
        points,
        raw,
        SensitivityMethod::KcentersClosedForm,
        ProfileFlags::default(),
        Some(fit.clone()),
        None,
    ))
}
