use crate::error::Result;
use crate::geometry::{project_set, DistanceConfig, PointSet, Projection};
use crate::linalg::{dot, orthonormalize, residual, right_svd};
use crate::shape::Shape;

/// The projected points expressed in an orthonormal basis of a subspace G.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    /// Orthonormal rows spanning G, `m x d`.
    pub basis: Vec<Vec<f64>>,
    /// Coordinates of the projected points in `basis`, as an `n x m` point set
    /// with the original weights and ids.
    pub points: PointSet,
    /// Rank of the span of the shape's constituents (contains every projected point).
    pub span_rank: usize,
    /// `k (j + 1)`: room reserved for an arbitrary shape of the family.
    pub shape_room: usize,
}

impl ReducedInstance {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Maps reduced coordinates back into the ambient space.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let d = self.basis[0].len();
        let mut out = vec![0.0; d];
        for (c, b) in coords.iter().zip(&self.basis) {
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    }
}

/// Projects `points` onto `shape` and rewrites the projection in a subspace
/// of dimension `min(r + k(j+1), d)`, where `r` is the rank of the span of
/// the shape's constituents.
///
/// The basis starts with that span (which contains every projected point) and
/// is completed with the leading principal directions of the residuals
/// `p - p'`, then with coordinate axes.
pub fn reduce(points: &PointSet, shape: &Shape, cfg: &DistanceConfig) -> Result<(Projection, ReducedInstance)> {
    super::require_dim(points, shape)?;
    let d = points.dim();
    let proj = project_set(points, shape, cfg)?;

    let mut spanning: Vec<Vec<f64>> = Vec::new();
    for f in shape.constituents() {
        spanning.push(f.canonical_anchor());
        spanning.extend(f.basis().iter().cloned());
    }
    let mut basis = orthonormalize(&spanning, 1e-10);
    let span_rank = basis.len();
    let shape_room = shape.k() * (shape.j() + 1);
    let m = (span_rank + shape_room).min(d);

    if basis.len() < m {
        let n = points.len();
        let mut data = Vec::with_capacity(n * d);
        for (p, q) in points.points().zip(proj.projected.points()) {
            let r: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            data.extend(residual(&r, &basis));
        }
        let svd = right_svd(&data, n, d);
        let smax = svd.singular_values.first().copied().unwrap_or(0.0);
        for (s, v) in svd.singular_values.iter().zip(&svd.vectors) {
            if basis.len() >= m || *s <= 1e-10 * smax || *s == 0.0 {
                break;
            }
            let mut all = basis.clone();
            all.push(v.clone());
            basis = orthonormalize(&all, 1e-8);
        }
    }
    for axis in 0..d {
        if basis.len() >= m {
            break;
        }
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        let mut all = basis.clone();
        all.push(e);
        basis = orthonormalize(&all, 1e-8);
    }
    basis.truncate(m);

    let mut coords = Vec::with_capacity(points.len() * m);
    for q in proj.projected.points() {
        coords.extend(basis.iter().map(|b| dot(q, b)));
    }
    let reduced = PointSet::new(coords, m)?
        .with_weights(points.weights().to_vec())?
        .with_ids(points.ids().to_vec())?;
    Ok((proj, ReducedInstance { basis, points: reduced, span_rank, shape_room }))
}
