use super::basis::conditioned_basis;
use super::reduce::reduce;
use super::{lift_bounds, ProfileFlags, SensitivityMethod, SensitivityProfile};
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::geometry::{DistanceConfig, PointSet};
use crate::shape::Shape;

/// Bound for a single j-flat via the hyperplane bound on the reduced instance.
///
/// The distance from a point to a hyperplane `{x : a.x = b}` (|a| = 1) is
/// `|[x 1] u|^z` with `u = (a, -b)`, so the row bounds of a conditioned basis
/// of `M = [w^(1/z) p'' , w^(1/z)]` bound every hyperplane's cost share, and
/// every j-flat is dominated by the hyperplane through it orthogonal to the
/// point's residual.
pub fn sens_subspace(points: &PointSet, fit: &FitResult, cfg: &DistanceConfig) -> Result<SensitivityProfile> {
    let Shape::JFlat(_) = &fit.shape else {
        return Err(Error::input("subspace bounds need a j-flat fit"));
    };
    if cfg.z < 1.0 {
        return Err(Error::capability("conditioned-basis bounds need z >= 1"));
    }
    let (proj, red) = reduce(points, &fit.shape, cfg)?;
    let n = points.len();
    let m = red.dim();
    let mut mat = Vec::with_capacity(n * (m + 1));
    for (q, w) in red.points.points().zip(points.weights()) {
        let s = w.powf(1.0 / cfg.z);
        mat.extend(q.iter().map(|x| s * x));
        mat.push(s);
    }
    let cb = conditioned_basis(&mat, n, m + 1, cfg.z)?;
    let hyp: Vec<f64> = cb.row_bounds().into_iter().map(|s| s.min(1.0)).collect();
    let raw = lift_bounds(points, &proj.residuals, &hyp, fit.approx_factor, cfg);
    let flags = ProfileFlags { loose: cb.loose, ..Default::default() };
    Ok(SensitivityProfile::from_raw(
        points,
        raw,
        SensitivityMethod::SubspaceConditionedBasis,
        flags,
        Some(fit.clone()),
        Some(m),
    ))
}
