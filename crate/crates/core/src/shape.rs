//! Shapes of (j,k)-projective clustering: k points, k lines, a j-flat, or k j-flats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, orthonormalize, sq_dist};

const ORTHO_TOL: f64 = 1e-12;

/// An affine flat stored as an anchor point plus an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Flat {
    anchor: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl Flat {
    /// Builds the flat through `anchor` spanned by `directions`.
    ///
    /// Directions are orthonormalized; linearly dependent directions are an
    /// error because the flat would silently lose a dimension.
    pub fn new(anchor: Vec<f64>, directions: &[Vec<f64>]) -> Result<Self> {
        let d = anchor.len();
        if d == 0 {
            return Err(Error::input("flat anchor must have at least one coordinate"));
        }
        if anchor.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("flat anchor has non-finite coordinates"));
        }
        for dir in directions {
            if dir.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: dir.len() });
            }
        }
        if directions.len() >= d {
            return Err(Error::input(format!(
                "flat dimension {} must be at most d-1 = {}",
                directions.len(),
                d - 1
            )));
        }
        let basis = orthonormalize(directions, 1e-10);
        if basis.len() != directions.len() {
            return Err(Error::input("flat directions are linearly dependent"));
        }
        Ok(Flat { anchor, basis })
    }

    /// A line through `anchor` with the given (not necessarily unit) direction.
    pub fn line(anchor: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        Flat::new(anchor, &[direction])
    }

    /// A 0-flat, i.e. a single point.
    pub fn point(p: Vec<f64>) -> Result<Self> {
        Flat::new(p, &[])
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Flat dimension j.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.len()
    }

    /// Orthogonal projection of `p` onto the flat and the squared distance.
    pub fn project(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let mut r: Vec<f64> = p.iter().zip(&self.anchor).map(|(x, a)| x - a).collect();
        for b in &self.basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        let sq = norm_sq(&r);
        let proj = p.iter().zip(&r).map(|(x, ri)| x - ri).collect();
        (proj, sq)
    }

    pub fn sq_dist(&self, p: &[f64]) -> f64 {
        let mut r: Vec<f64> = p.iter().zip(&self.anchor).map(|(x, a)| x - a).collect();
        for b in &self.basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        norm_sq(&r)
    }

    /// Largest deviation of the basis Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (k, b) in self.basis.iter().enumerate() {
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Same flat with the anchor moved to the point closest to the origin.
    pub fn canonical_anchor(&self) -> Vec<f64> {
        let mut a = self.anchor.clone();
        for b in &self.basis {
            let c = dot(&a, b);
            a.iter_mut().zip(b).for_each(|(ai, bi)| *ai -= c * bi);
        }
        a
    }

    /// Apply an affine map `x -> f(x)` given the linear part `lin` (applied to
    /// directions) and the full map `aff` (applied to the anchor).
    pub fn map(
        &self,
        aff: impl Fn(&[f64]) -> Vec<f64>,
        lin: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Flat> {
        let dirs: Vec<Vec<f64>> = self.basis.iter().map(|b| lin(b)).collect();
        Flat::new(aff(&self.anchor), &dirs)
    }
}

/// A shape from one of the four projective-clustering families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub enum Shape {
    KPoints { centers: Vec<Vec<f64>> },
    KLines { lines: Vec<Flat> },
    JFlat(Flat),
    KJFlats(Vec<Flat>),
}

impl Shape {
    pub fn kpoints(centers: Vec<Vec<f64>>) -> Result<Self> {
        let s = Shape::KPoints { centers };
        s.validate()?;
        Ok(s)
    }

    pub fn klines(lines: Vec<Flat>) -> Result<Self> {
        let s = Shape::KLines { lines };
        s.validate()?;
        Ok(s)
    }

    pub fn jflat(flat: Flat) -> Result<Self> {
        let s = Shape::JFlat(flat);
        s.validate()?;
        Ok(s)
    }

    pub fn kjflats(flats: Vec<Flat>) -> Result<Self> {
        let s = Shape::KJFlats(flats);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.ambient_dim();
        if self.k() == 0 {
            return Err(Error::input("shape must have at least one constituent"));
        }
        match self {
            Shape::KPoints { centers } => {
                for c in centers {
                    if c.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: c.len() });
                    }
                    if c.iter().any(|x| !x.is_finite()) {
                        return Err(Error::input("center has non-finite coordinates"));
                    }
                }
            }
            Shape::KLines { lines } => {
                for l in lines {
                    if l.dim() != 1 {
                        return Err(Error::input("k-lines constituent is not a line"));
                    }
                }
                check_flats(lines, d)?;
            }
            Shape::JFlat(f) => check_flats(std::slice::from_ref(f), d)?,
            Shape::KJFlats(fs) => {
                let j = fs[0].dim();
                if fs.iter().any(|f| f.dim() != j) {
                    return Err(Error::input("k-j-flats constituents differ in dimension"));
                }
                check_flats(fs, d)?;
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Shape::KPoints { centers } => centers.first().map_or(0, |c| c.len()),
            Shape::KLines { lines } => lines.first().map_or(0, |l| l.ambient_dim()),
            Shape::JFlat(f) => f.ambient_dim(),
            Shape::KJFlats(fs) => fs.first().map_or(0, |f| f.ambient_dim()),
        }
    }

    /// Number of constituents (centers, lines or flats).
    pub fn k(&self) -> usize {
        match self {
            Shape::KPoints { centers } => centers.len(),
            Shape::KLines { lines } => lines.len(),
            Shape::JFlat(_) => 1,
            Shape::KJFlats(fs) => fs.len(),
        }
    }

    /// Dimension j of each constituent.
    pub fn j(&self) -> usize {
        match self {
            Shape::KPoints { .. } => 0,
            Shape::KLines { .. } => 1,
            Shape::JFlat(f) => f.dim(),
            Shape::KJFlats(fs) => fs[0].dim(),
        }
    }

    /// Squared Euclidean distance to the nearest constituent and its index.
    /// Ties go to the lowest index.
    pub fn nearest(&self, p: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        let mut consider = |i: usize, sq: f64| {
            if sq < best.1 {
                best = (i, sq);
            }
        };
        match self {
            Shape::KPoints { centers } => {
                centers.iter().enumerate().for_each(|(i, c)| consider(i, sq_dist(p, c)))
            }
            Shape::KLines { lines: fs } | Shape::KJFlats(fs) => {
                fs.iter().enumerate().for_each(|(i, f)| consider(i, f.sq_dist(p)))
            }
            Shape::JFlat(f) => consider(0, f.sq_dist(p)),
        }
        best
    }

    /// Nearest point of the shape to `p`, with constituent index and squared distance.
    pub fn project(&self, p: &[f64]) -> (usize, Vec<f64>, f64) {
        let (idx, _) = self.nearest(p);
        match self {
            Shape::KPoints { centers } => {
                let c = centers[idx].clone();
                let sq = sq_dist(p, &c);
                (idx, c, sq)
            }
            _ => {
                let (q, sq) = self.constituent_flat(idx).project(p);
                (idx, q, sq)
            }
        }
    }

    /// Constituent `i` as a flat (centers become 0-flats).
    pub fn constituent_flat(&self, i: usize) -> Flat {
        match self {
            Shape::KPoints { centers } => Flat { anchor: centers[i].clone(), basis: vec![] },
            Shape::KLines { lines: fs } | Shape::KJFlats(fs) => fs[i].clone(),
            Shape::JFlat(f) => f.clone(),
        }
    }

    pub fn constituents(&self) -> Vec<Flat> {
        (0..self.k()).map(|i| self.constituent_flat(i)).collect()
    }

    /// Rebuild a shape of the same variant from new constituents.
    pub fn with_constituents(&self, flats: Vec<Flat>) -> Result<Shape> {
        match self {
            Shape::KPoints { .. } => {
                Shape::kpoints(flats.into_iter().map(|f| f.anchor).collect())
            }
            Shape::KLines { .. } => Shape::klines(flats),
            Shape::JFlat(_) => {
                let f = flats
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::input("j-flat needs one constituent"))?;
                Shape::jflat(f)
            }
            Shape::KJFlats(_) => Shape::kjflats(flats),
        }
    }

    /// Worst orthonormality defect over all constituent bases.
    pub fn orthonormality_error(&self) -> f64 {
        self.constituents()
            .iter()
            .map(Flat::orthonormality_error)
            .fold(0.0, f64::max)
    }
}

fn check_flats(flats: &[Flat], d: usize) -> Result<()> {
    for f in flats {
        if f.ambient_dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: f.ambient_dim() });
        }
        if f.dim() >= d {
            return Err(Error::input("flat dimension must be at most d-1"));
        }
        if f.orthonormality_error() > ORTHO_TOL {
            return Err(Error::input("flat basis is not orthonormal"));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LineRepr {
    anchor: Vec<f64>,
    direction: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FlatRepr {
    anchor: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl From<&Flat> for FlatRepr {
    fn from(f: &Flat) -> Self {
        FlatRepr { anchor: f.anchor.clone(), basis: f.basis.clone() }
    }
}

impl TryFrom<FlatRepr> for Flat {
    type Error = Error;
    fn try_from(r: FlatRepr) -> Result<Flat> {
        Flat::new(r.anchor, &r.basis)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
enum ShapeRepr {
    Kpoints { centers: Vec<Vec<f64>> },
    Klines { lines: Vec<LineRepr> },
    Jflat { anchor: Vec<f64>, basis: Vec<Vec<f64>> },
    Kjflats { flats: Vec<FlatRepr> },
}

impl From<Shape> for ShapeRepr {
    fn from(s: Shape) -> Self {
        match s {
            Shape::KPoints { centers } => ShapeRepr::Kpoints { centers },
            Shape::KLines { lines } => ShapeRepr::Klines {
                lines: lines
                    .into_iter()
                    .map(|l| LineRepr { direction: l.basis[0].clone(), anchor: l.anchor })
                    .collect(),
            },
            Shape::JFlat(f) => ShapeRepr::Jflat { anchor: f.anchor, basis: f.basis },
            Shape::KJFlats(fs) => ShapeRepr::Kjflats { flats: fs.iter().map(FlatRepr::from).collect() },
        }
    }
}

impl TryFrom<ShapeRepr> for Shape {
    type Error = Error;
    fn try_from(r: ShapeRepr) -> Result<Shape> {
        match r {
            ShapeRepr::Kpoints { centers } => Shape::kpoints(centers),
            ShapeRepr::Klines { lines } => Shape::klines(
                lines
                    .into_iter()
                    .map(|l| Flat::line(l.anchor, l.direction))
                    .collect::<Result<_>>()?,
            ),
            ShapeRepr::Jflat { anchor, basis } => Shape::jflat(Flat::new(anchor, &basis)?),
            ShapeRepr::Kjflats { flats } => Shape::kjflats(
                flats.into_iter().map(Flat::try_from).collect::<Result<_>>()?,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_direction_is_normalized() {
        let l = Flat::line(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert!((l.basis()[0][0] - 0.6).abs() < 1e-15);
        assert!(l.orthonormality_error() < 1e-12);
    }

    #[test]
    fn dependent_directions_rejected() {
        let r = Flat::new(vec![0.0; 3], &[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn full_dimensional_flat_rejected() {
        assert!(Flat::new(vec![0.0; 2], &[vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn json_round_trip_and_tags() {
        let s = Shape::klines(vec![
            Flat::line(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap(),
            Flat::line(vec![0.0, 0.5], vec![1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"variant\":\"klines\""));
        let back: Shape = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);

        let f: Shape =
            serde_json::from_str(r#"{"variant":"jflat","anchor":[0,0,1],"basis":[[1,0,0]]}"#).unwrap();
        assert_eq!(f.j(), 1);
        assert!(serde_json::from_str::<Shape>(r#"{"variant":"kpoints","centers":[]}"#).is_err());
    }

    #[test]
    fn nearest_breaks_ties_by_lowest_index() {
        let s = Shape::kpoints(vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.nearest(&[0.0, 0.0]).0, 0);
    }
}
