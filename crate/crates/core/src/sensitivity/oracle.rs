use std::collections::HashMap;

use super::empirical::Scorer;
use super::{ProfileFlags, SensitivityMethod, SensitivityProfile};
use crate::error::{Error, Result};
use crate::fit::{cluster_optimum, Family};
use crate::geometry::{DistanceConfig, PointSet};
use crate::shape::{Flat, Shape};

#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Fresh random starting shapes per location, on top of its best structured candidate.
    pub random_starts: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { random_starts: 6, ascent_steps: 400, seed: 0 }
    }
}

fn check_envelope(points: &PointSet, family: Family, cfg: &DistanceConfig) -> Result<()> {
    family.validate(points.dim())?;
    let ok_size = points.len() <= 12 && points.dim() <= 3;
    let ok_family = match family {
        Family::KCenters { k } => k <= 3 && (cfg.z == 1.0 || cfg.z == 2.0),
        Family::KLines { k } => k <= 2 && cfg.z == 2.0,
        Family::JFlat { j } => j <= 2 && cfg.z == 2.0,
        Family::KJFlats { .. } => false,
    };
    if ok_size && ok_family {
        Ok(())
    } else {
        Err(Error::capability(format!(
            "sensitivity oracle supports n <= 12, d <= 3 and kcenters (k <= 3, z in {{1,2}}), \
             klines (k <= 2, z = 2), jflat (j <= 2, z = 2); got {} with n = {}, d = {}, z = {}",
            family.name(),
            points.len(),
            points.dim(),
            cfg.z
        )))
    }
}

/// Brute-force sensitivities for tiny instances.
///
/// Candidates are every shape whose constituents are the optimal fits of
/// disjoint blocks of points (all other points excluded), which includes
/// every shape through point tuples; each location then gets a local ascent
/// from its best candidate and from random starts. Returns the best ratio
/// found per point, which approaches the supremum from below.
pub fn exact_sensitivity_oracle(
    points: &PointSet,
    family: Family,
    cfg: &DistanceConfig,
    opts: &OracleOptions,
) -> Result<SensitivityProfile> {
    check_envelope(points, family, cfg)?;
    let n = points.len();
    let k = family.k();
    let j = family.j();
    let mut optima: HashMap<u32, Flat> = HashMap::new();
    let mut partitions: Vec<Vec<u32>> = Vec::new();
    enumerate(n, k, 0, &mut Vec::new(), &mut partitions);

    let mut scorer = Scorer::new(points, cfg);
    for chunk in partitions.chunks(4096) {
        let shapes: Vec<Shape> = chunk
            .iter()
            .map(|blocks| {
                let flats: Vec<Flat> = blocks
                    .iter()
                    .map(|&m| optima.entry(m).or_insert_with(|| cluster_optimum(points, m, j, cfg).1).clone())
                    .collect();
                build(family, flats)
            })
            .collect();
        scorer.observe_all(&shapes);
    }
    let locs: Vec<usize> = (0..scorer.locations()).collect();
    scorer.ascend_locations(&locs, family, opts.ascent_steps, opts.random_starts, opts.seed);

    Ok(SensitivityProfile::from_raw(
        points,
        scorer.values(),
        SensitivityMethod::ExactOracle,
        ProfileFlags::default(),
        None,
        None,
    ))
}

fn build(family: Family, flats: Vec<Flat>) -> Shape {
    match family {
        Family::KCenters { .. } => Shape::kpoints(flats.into_iter().map(|f| f.anchor().to_vec()).collect()),
        Family::KLines { .. } => Shape::klines(flats),
        Family::JFlat { .. } => Shape::jflat(flats.into_iter().next().expect("one block")),
        Family::KJFlats { .. } => Shape::kjflats(flats),
    }
    .expect("block optima form a valid shape")
}

/// Every assignment of points `i..n` to "excluded" or one of at most `k`
/// blocks (restricted growth, so block order is canonical).
fn enumerate(n: usize, k: usize, i: usize, blocks: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if i == n {
        if !blocks.is_empty() {
            out.push(blocks.clone());
        }
        return;
    }
    enumerate(n, k, i + 1, blocks, out);
    for b in 0..blocks.len() {
        blocks[b] |= 1 << i;
        enumerate(n, k, i + 1, blocks, out);
        blocks[b] &= !(1 << i);
    }
    if blocks.len() < k {
        blocks.push(1 << i);
        enumerate(n, k, i + 1, blocks, out);
        blocks.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(z: f64) -> DistanceConfig {
        DistanceConfig::new(z).unwrap()
    }

    #[test]
    fn coincident_pair_k1() {
        let p = PointSet::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let prof = exact_sensitivity_oracle(&p, Family::KCenters { k: 1 }, &cfg(1.0), &OracleOptions::default())
            .unwrap();
        for s in prof.bounds {
            assert!((s - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_points_two_centers() {
        let p = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let prof = exact_sensitivity_oracle(&p, Family::KCenters { k: 2 }, &cfg(2.0), &OracleOptions::default())
            .unwrap();
        assert_eq!(prof.bounds, vec![1.0, 1.0]);
    }

    #[test]
    fn collinear_points_one_line_match_leverage() {
        let p = PointSet::from_rows(&[vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let prof =
            exact_sensitivity_oracle(&p, Family::KLines { k: 1 }, &cfg(2.0), &OracleOptions::default()).unwrap();
        for (s, want) in prof.bounds.iter().zip([5.0 / 6.0, 1.0 / 3.0, 5.0 / 6.0]) {
            assert!((s - want).abs() < 1e-6, "{s} vs {want}");
        }
    }

    #[test]
    fn partition_count() {
        // Assignments of 4 points to excluded or <= 2 unlabeled blocks, minus the empty one.
        let mut out = Vec::new();
        enumerate(4, 2, 0, &mut Vec::new(), &mut out);
        // sum_t C(4,t) (S(t,1) + S(t,2)) = 4*1 + 6*2 + 4*4 + 1*8 = 40
        assert_eq!(out.len(), 40);
    }

    #[test]
    fn outside_envelope() {
        let p = PointSet::from_rows(&[vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let e = exact_sensitivity_oracle(&p, Family::KCenters { k: 1 }, &cfg(2.0), &OracleOptions::default());
        assert!(e.unwrap_err().is_capability());
        let q = PointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let e = exact_sensitivity_oracle(&q, Family::KCenters { k: 1 }, &cfg(3.0), &OracleOptions::default());
        assert!(e.unwrap_err().is_capability());
    }
}
