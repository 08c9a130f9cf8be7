//! Points `p_i = (2^-(i-1), 0)` on the x-axis with, for each `i`, the
//! two-line shape `F_i = {x = 0} u {y = 2^-i}` (k = 2, z = 1).
//!
//! Under `F_i` the first `i+1` points all sit at distance `2^-i` (the
//! horizontal line) and the rest at their x-coordinate, so
//! `dist(p_i, F_i) / dist(P, F_i) = 1 / (2 + i - 2^(1+i-n)) > 1 / (2+i)`
//! and the ratios sum to roughly `ln n`.

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::linalg::{exact_sum, pairwise_sum};
use crate::shape::{Flat, Shape};

/// Largest n for which every squared distance of the instance (down to
/// `2^-2n`) is an exactly representable f64, so geometric evaluation is exact.
pub const MAX_REPRESENTABLE_N: usize = 537;

/// The instance and its n adversarial shapes. Use with z = 1.
pub fn lowerbound_instance(n: usize) -> Result<(PointSet, Vec<Shape>)> {
    if n < 2 {
        return Err(Error::input(format!("the lower-bound instance needs n >= 2, got {n}")));
    }
    if n > MAX_REPRESENTABLE_N {
        return Err(Error::capability(format!(
            "squared distances 2^-2n underflow f64 for n > {MAX_REPRESENTABLE_N}; use the ratio table instead"
        )));
    }
    let rows: Vec<Vec<f64>> = (1..=n).map(|i| vec![pow2(1 - i as i64), 0.0]).collect();
    let points = PointSet::from_rows(&rows)?;
    let shapes = (1..=n)
        .map(|i| {
            let vertical = Flat::line(vec![0.0, 0.0], vec![0.0, 1.0])?;
            let horizontal = Flat::line(vec![0.0, pow2(-(i as i64))], vec![1.0, 0.0])?;
            Shape::klines(vec![vertical, horizontal])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((points, shapes))
}

fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// `dist(p_i, F_i) / dist(P, F_i)` for `1 <= i <= n`, evaluated without
/// forming the points: after scaling by `2^i` point `j` contributes
/// `min(2^(i-j+1), 1)`, an exactly representable dyadic, and the terms are
/// summed exactly. Valid for any n.
pub fn lowerbound_ratio(n: usize, i: usize) -> f64 {
    assert!(1 <= i && i <= n, "need 1 <= i <= n");
    let mut terms = vec![(i + 1).min(n) as f64];
    // Terms below 2^-1074 vanish; they cannot move the correctly rounded sum.
    terms.extend((i + 2..=n).take(1100).map(|j| pow2(i as i64 - j as i64 + 1)));
    1.0 / exact_sum(&terms)
}

pub fn lowerbound_ratios(n: usize) -> Vec<f64> {
    (1..=n).map(|i| lowerbound_ratio(n, i)).collect()
}

/// `sum_i dist(p_i, F_i) / dist(P, F_i)`, a lower bound on the total sensitivity.
pub fn lowerbound_total(n: usize) -> f64 {
    pairwise_sum(&lowerbound_ratios(n))
}

/// `H(n+2) - H(2) = sum_{i=1..n} 1/(2+i)`.
pub fn harmonic_lower_bound(n: usize) -> f64 {
    let terms: Vec<f64> = (1..=n).map(|i| 1.0 / (2 + i) as f64).collect();
    pairwise_sum(&terms)
}
