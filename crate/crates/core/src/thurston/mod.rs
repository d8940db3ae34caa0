//! Expanding Thurston maps given by two-tile subdivision rules.
//!
//! The sphere is two equilateral triangles of side 1 (front and back) glued
//! along their boundary. Points are exact barycentric triples; a point on the
//! common boundary is always stored on the front face.

mod complex;
mod rule;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MetricPoint, Space};
use crate::numerics::{format_rational, parse_rational, q_to_f64, sqrt_rational, BallReal};

pub use complex::{flower, max_tile_diameter, mme_tile_measure, subdivide, Tile, TileComplex};
pub use rule::{Chart, RuleName, SubdivisionMap, SubdivisionRule};

pub type Bary = [BigRational; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Front,
    Back,
}

impl Face {
    pub fn sign(self) -> i32 {
        match self {
            Face::Front => 1,
            Face::Back => -1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Face::Front => 0,
            Face::Back => 1,
        }
    }

    pub fn from_index(k: usize) -> Face {
        if k == 0 {
            Face::Front
        } else {
            Face::Back
        }
    }
}

/// A point of the doubled triangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TilePoint {
    face: Face,
    bary: Bary,
}

impl TilePoint {
    pub fn new(face: Face, bary: Bary) -> Result<Self> {
        if bary.iter().any(|c| c.is_negative()) {
            return Err(Error::Invalid("barycentric coordinates must be nonnegative".into()));
        }
        if !(&bary[0] + &bary[1] + &bary[2]).is_one() {
            return Err(Error::Invalid("barycentric coordinates must sum to one".into()));
        }
        Ok(Self::canonical(face, bary))
    }

    fn canonical(face: Face, bary: Bary) -> Self {
        let face = if bary.iter().any(|c| c.is_zero()) { Face::Front } else { face };
        TilePoint { face, bary }
    }

    /// Corner `k` of the triangle (`0 = A`, `1 = B`, `2 = C`).
    pub fn corner(k: usize) -> Self {
        let mut b: Bary = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
        b[k] = BigRational::one();
        TilePoint { face: Face::Front, bary: b }
    }

    pub fn barycenter(face: Face) -> Self {
        let t = BigRational::new(1.into(), 3.into());
        TilePoint { face, bary: [t.clone(), t.clone(), t] }
    }

    pub fn face(&self) -> Face {
        self.face
    }

    pub fn bary(&self) -> &Bary {
        &self.bary
    }

    /// On the glued boundary (the equator).
    pub fn on_equator(&self) -> bool {
        self.bary.iter().any(|c| c.is_zero())
    }

    fn planar(&self) -> [f64; 3] {
        [q_to_f64(&self.bary[0]), q_to_f64(&self.bary[1]), q_to_f64(&self.bary[2])]
    }
}

pub(crate) fn sub(a: &Bary, b: &Bary) -> Bary {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

/// Squared length of a displacement (coordinates summing to zero), side length 1.
pub(crate) fn sq_len(d: &Bary) -> BigRational {
    -(&d[0] * &d[1] + &d[1] * &d[2] + &d[2] * &d[0])
}

/// Mirror image across the edge opposite corner `k`, in the same barycentric frame.
fn reflect(q: &Bary, k: usize) -> Bary {
    let mut r = q.clone();
    for j in 0..3 {
        r[j] = if j == k { -&q[k] } else { &q[j] + &q[k] };
    }
    r
}

/// Geodesic distance on the doubled triangle.
///
/// Within a face it is Euclidean. Between faces a shortest path crosses the
/// equator once; unfolding across each edge gives a straight segment when it
/// meets that edge, and otherwise the path bends at a corner.
pub fn tri_distance(p: &TilePoint, q: &TilePoint, prec: i64) -> BallReal {
    let sqrt = |x: &BigRational| sqrt_rational(x, prec + 2).expect("nonnegative");
    if p.face == q.face || p.on_equator() || q.on_equator() {
        return sqrt(&sq_len(&sub(&p.bary, &q.bary)));
    }
    let mut best_sq: Option<BigRational> = None;
    for k in 0..3 {
        let r = reflect(&q.bary, k);
        // the segment p -> r meets the line of edge k at parameter t
        let t = &p.bary[k] / (&p.bary[k] - &r[k]);
        let hits = (0..3).filter(|&j| j != k).all(|j| !(&p.bary[j] + &t * (&r[j] - &p.bary[j])).is_negative());
        if hits {
            let d = sq_len(&sub(&p.bary, &r));
            if best_sq.as_ref().map_or(true, |b| d < *b) {
                best_sq = Some(d);
            }
        }
    }
    let mut best = best_sq.map(|d| sqrt(&d));
    for v in 0..3 {
        let c = TilePoint::corner(v);
        let route = &sqrt(&sq_len(&sub(&p.bary, &c.bary))) + &sqrt(&sq_len(&sub(&c.bary, &q.bary)));
        best = Some(match best {
            Some(b) => b.min(&route),
            None => route,
        });
    }
    best.expect("some route exists")
}

fn tri_distance_f64(p: &(i8, [f64; 3]), q: &(i8, [f64; 3])) -> f64 {
    let len = |d: [f64; 3]| (-(d[0] * d[1] + d[1] * d[2] + d[2] * d[0])).max(0.0).sqrt();
    let diff = |a: &[f64; 3], b: &[f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let (a, b) = (&p.1, &q.1);
    if p.0 == q.0 || p.0 == 0 || q.0 == 0 {
        return len(diff(a, b));
    }
    let mut best = f64::INFINITY;
    for k in 0..3 {
        let mut r = *b;
        for j in 0..3 {
            r[j] = if j == k { -b[k] } else { b[j] + b[k] };
        }
        let t = a[k] / (a[k] - r[k]);
        if (0..3).filter(|&j| j != k).all(|j| a[j] + t * (r[j] - a[j]) >= 0.0) {
            best = best.min(len(diff(a, &r)));
        }
    }
    for v in 0..3 {
        let mut c = [0.0; 3];
        c[v] = 1.0;
        best = best.min(len(diff(a, &c)) + len(diff(&c, b)));
    }
    best
}

impl MetricPoint for TilePoint {
    const SPACE: Space = Space::TriSphere;
    type Embed = (i8, [f64; 3]);

    fn distance(&self, other: &Self, prec: i64) -> BallReal {
        tri_distance(self, other, prec)
    }

    fn embed(&self) -> (i8, [f64; 3]) {
        let f = if self.on_equator() { 0 } else { self.face.sign() as i8 };
        (f, self.planar())
    }

    fn embedded_distance(a: &(i8, [f64; 3]), b: &(i8, [f64; 3])) -> f64 {
        tri_distance_f64(a, b)
    }

    fn csv_header() -> &'static [&'static str] {
        &["face", "l1", "l2", "l3"]
    }

    fn csv_fields(&self) -> Vec<String> {
        let mut v = vec![format!("{:?}", self.face).to_lowercase()];
        v.extend(self.bary.iter().map(format_rational));
        v
    }
}

impl fmt::Display for TilePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.bary.iter().map(format_rational).collect();
        write!(f, "{:?}({})", self.face, c.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct TilePointJson {
    face: Face,
    bary: [String; 3],
}

impl Serialize for TilePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TilePointJson { face: self.face, bary: self.bary.clone().map(|c| format_rational(&c)) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TilePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = TilePointJson::deserialize(d)?;
        let mut b: Vec<BigRational> = Vec::with_capacity(3);
        for c in &j.bary {
            b.push(parse_rational(c).map_err(D::Error::custom)?);
        }
        let bary: Bary = [b[0].clone(), b[1].clone(), b[2].clone()];
        TilePoint::new(j.face, bary).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn pt(face: Face, a: (i64, i64), b: (i64, i64)) -> TilePoint {
        let x = rat(a.0, a.1);
        let y = rat(b.0, b.1);
        let z = BigRational::one() - &x - &y;
        TilePoint::new(face, [x, y, z]).unwrap()
    }

    #[test]
    fn boundary_points_live_on_front() {
        let p = pt(Face::Back, (1, 2), (1, 2));
        assert_eq!(p.face(), Face::Front);
        assert_eq!(p, pt(Face::Front, (1, 2), (1, 2)));
    }

    #[test]
    fn side_and_height() {
        let d = tri_distance(&TilePoint::corner(0), &TilePoint::corner(1), 40);
        assert!(d.contains_rational(&BigRational::one()));
        // front and back barycenters: through an edge midpoint, 2 * (sqrt(3)/6)
        let f = TilePoint::barycenter(Face::Front);
        let b = TilePoint::barycenter(Face::Back);
        let d = tri_distance(&f, &b, 60).to_f64();
        assert!((d - 3f64.sqrt() / 3.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn f64_route_agrees() {
        let p = pt(Face::Front, (1, 5), (3, 5));
        let q = pt(Face::Back, (2, 3), (1, 7));
        let exact = tri_distance(&p, &q, 60).to_f64();
        let fast = tri_distance_f64(&p.embed(), &q.embed());
        assert!((exact - fast).abs() < 1e-13);
    }
}
