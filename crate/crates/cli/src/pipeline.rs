//! The fit → sensitivity → sampling-profile chain shared by `coreset` and `experiment`.

use projclust::coreset::mix_floor;
use projclust::fit::{fit, Family, FitOptions, FitResult};
use projclust::sensitivity::{compute, EmpiricalOptions};
use projclust::{DistanceConfig, PointSet, Result, SensitivityProfile};

pub fn fit_and_profile(
    points: &PointSet,
    family: Family,
    cfg: &DistanceConfig,
    fit_opts: &FitOptions,
    emp: &EmpiricalOptions,
) -> Result<(FitResult, SensitivityProfile)> {
    let f = fit(points, family, cfg, fit_opts)?;
    let profile = compute(points, &f, cfg, emp)?;
    Ok((f, profile))
}

/// Lower-estimate profiles cannot be sampled from directly; mix in a uniform
/// floor first. Certified profiles pass through untouched.
pub fn sampling_profile(points: &PointSet, profile: SensitivityProfile, floor: f64) -> Result<(SensitivityProfile, Option<f64>)> {
    if profile.flags.lower_bound && !profile.flags.floor_mixed {
        Ok((mix_floor(points, &profile, floor)?, Some(floor)))
    } else {
        Ok((profile, None))
    }
}
