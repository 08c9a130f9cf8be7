//! Sensitivity-sampling coresets for (j,k)-projective clustering.
//!
//! The pipeline is: fit an (approximately) optimal shape, bound every point's
//! sensitivity by projecting onto that shape and bounding the projected
//! instance in a low-dimensional subspace, then sample points with
//! probability proportional to their bounds. Coresets are subsets of the
//! input with strictly positive weights.
//!
//! - [`geometry`]: point sets, shapes, z-power distances, projections, costs.
//! - [`fit`]: heuristic fitters and an exact enumeration fitter for tiny inputs.
//! - [`sensitivity`]: closed-form and conditioned-basis bounds, the reduction
//!   to a low-dimensional instance, empirical estimators and exact oracles.
//! - [`coreset`]: size planning, sampling and empirical quality evaluation.
//! - [`synth`], [`shapegen`]: seeded instance generators and shape ensembles.

pub mod coreset;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod sensitivity;
pub mod shape;
pub mod shapegen;
pub mod synth;

pub use error::{Error, Result};
pub use coreset::{Coreset, CoresetPlan};
pub use fit::{Family, FitOptions, FitResult};
pub use geometry::{cost, dist_point_shape, project_set, DistanceConfig, PointSet, Projection};
pub use sensitivity::SensitivityProfile;
pub use shape::{Flat, Shape};
