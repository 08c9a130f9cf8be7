use crate::linalg::{norm_sq, sq_dist};

pub fn weighted_centroid(points: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    let d = points[0].len();
    let mut c = vec![0.0; d];
    let mut total = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        total += w;
        c.iter_mut().zip(p.iter()).for_each(|(ci, x)| *ci += w * x);
    }
    c.iter_mut().for_each(|x| *x /= total);
    c
}

fn spread(points: &[&[f64]]) -> f64 {
    let first = points[0];
    points.iter().map(|p| sq_dist(p, first)).fold(0.0, f64::max).sqrt()
}

/// Weighted geometric median by Weiszfeld iteration with the Vardi–Zhang
/// correction at data points.
///
/// An iterate that lands on a data point either certifies optimality there
/// (subgradient test) or takes the corrected step off it, so the iteration
/// never divides by a zero distance.
pub fn geometric_median(points: &[&[f64]], weights: &[f64], start: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let d = start.len();
    let scale = spread(points).max(f64::MIN_POSITIVE);
    let coincide = 1e-14 * scale;
    let mut y = start.to_vec();
    for _ in 0..max_iter {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut pull = vec![0.0; d];
        let mut eta = 0.0;
        for (p, &w) in points.iter().zip(weights) {
            let dist = sq_dist(p, &y).sqrt();
            if dist <= coincide {
                eta += w;
                continue;
            }
            for c in 0..d {
                num[c] += w * p[c] / dist;
                pull[c] += w * (p[c] - y[c]) / dist;
            }
            den += w / dist;
        }
        if den == 0.0 {
            return y;
        }
        let target: Vec<f64> = num.iter().map(|x| x / den).collect();
        let next = if eta == 0.0 {
            target
        } else {
            let r = norm_sq(&pull).sqrt();
            if r <= eta {
                return y;
            }
            let g = (eta / r).min(1.0);
            target.iter().zip(&y).map(|(t, yi)| (1.0 - g) * t + g * yi).collect()
        };
        let step = sq_dist(&next, &y).sqrt();
        y = next;
        if step <= tol * scale {
            break;
        }
    }
    y
}

/// `sum_i w_i |p_i - c|^z`.
pub fn center_cost(points: &[&[f64]], weights: &[f64], c: &[f64], z: f64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| {
            let sq = sq_dist(p, c);
            w * if z == 2.0 { sq } else { sq.powf(z / 2.0) }
        })
        .sum()
}

/// Minimizer of `sum_i w_i |p_i - c|^z` by normalized-gradient pattern search.
///
/// Every accepted step strictly lowers the objective, so the result is never
/// worse than `start`.
pub fn zpower_center(points: &[&[f64]], weights: &[f64], start: &[f64], z: f64, max_iter: usize) -> Vec<f64> {
    let d = start.len();
    let scale = spread(points).max(f64::MIN_POSITIVE);
    let mut c = start.to_vec();
    let mut fc = center_cost(points, weights, &c, z);
    let mut step = 0.1 * scale;
    for _ in 0..max_iter {
        let mut g = vec![0.0; d];
        for (p, &w) in points.iter().zip(weights) {
            let sq = sq_dist(p, &c);
            if sq == 0.0 {
                continue;
            }
            let f = w * z * sq.powf(z / 2.0 - 1.0);
            for k in 0..d {
                g[k] += f * (c[k] - p[k]);
            }
        }
        let gn = norm_sq(&g).sqrt();
        if gn == 0.0 {
            break;
        }
        let mut moved = false;
        while step > 1e-13 * scale {
            let cand: Vec<f64> = c.iter().zip(&g).map(|(ci, gi)| ci - step * gi / gn).collect();
            let fcand = center_cost(points, weights, &cand, z);
            if fcand < fc {
                c = cand;
                fc = fcand;
                step *= 1.5;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_collinear_odd_set_is_middle_point() {
        let pts = [vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let m = geometric_median(&refs, &[1.0; 3], &[2.0, 0.0], 1e-12, 10_000);
        assert!((m[0] - 1.0).abs() < 1e-9 && m[1].abs() < 1e-9, "{m:?}");
    }

    #[test]
    fn median_of_square_is_center() {
        let pts = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let m = geometric_median(&refs, &[1.0; 4], &[0.0, 0.0], 1e-12, 10_000);
        assert!((m[0] - 0.5).abs() < 1e-9 && (m[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn heavy_point_attracts_median() {
        let pts = [vec![0.0], vec![1.0], vec![2.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let m = geometric_median(&refs, &[5.0, 1.0, 1.0], &[1.0], 1e-12, 10_000);
        assert!(m[0].abs() < 1e-12);
    }

    #[test]
    fn zpower_center_matches_centroid_at_z2() {
        let pts = [vec![0.0, 0.0], vec![3.0, 1.0], vec![1.0, 4.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let c = zpower_center(&refs, &[1.0; 3], &[10.0, 10.0], 2.0, 2000);
        let mu = weighted_centroid(&refs, &[1.0; 3]);
        assert!(sq_dist(&c, &mu).sqrt() < 1e-6, "{c:?} vs {mu:?}");
    }
}
