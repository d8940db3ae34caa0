//! Open sets on which a map is injective, and preimage bookkeeping on them.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::JacobianSpec;
use crate::error::{Error, Result};
use crate::measure::{Hat, MetricPoint};
use crate::numerics::{BallReal, GaussRat};
use crate::ratmap::{Chart, ChartPoint, Postcritical, RationalMap};
use crate::sphere::{chordal_sq, PointBall, SpherePoint};
use crate::thurston::{SubdivisionMap, TilePoint};

/// Whether a preimage enclosure lies in a patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    Unknown,
}

/// A family of open patches with exact membership for points and
/// conservative membership for preimage enclosures.
pub trait PatchSystem {
    type Point: MetricPoint;
    type Pre;

    fn patch_count(&self) -> usize;
    fn contains(&self, k: usize, p: &Self::Point) -> bool;
    fn preimages(&self, x: &Self::Point) -> Result<Vec<Self::Pre>>;
    fn pre_membership(&self, k: usize, y: &Self::Pre) -> Membership;
    fn hat_at(&self, tau: &Hat<Self::Point>, y: &Self::Pre, prec: i64) -> BallReal;
    fn jacobian_at_point(&self, j: &JacobianSpec, x: &Self::Point, prec: i64) -> Result<BallReal>;
}

/// An open patch of the sphere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpherePatch {
    /// Open chordal disc.
    Disc {
        center: SpherePoint,
        #[serde(with = "crate::numerics::rational_text")]
        radius: BigRational,
    },
    /// `Re(conj(normal) z) > offset`.
    HalfPlane {
        normal: GaussRat,
        #[serde(with = "crate::numerics::rational_text")]
        offset: BigRational,
    },
}

impl SpherePatch {
    pub fn contains(&self, p: &SpherePoint) -> bool {
        match self {
            SpherePatch::Disc { center, radius } => chordal_sq(center, p) < radius * radius,
            SpherePatch::HalfPlane { normal, offset } => match p {
                SpherePoint::Infinity => false,
                SpherePoint::Finite(z) => (&normal.re * &z.re + &normal.im * &z.im) > *offset,
            },
        }
    }

    pub fn membership(&self, y: &ChartPoint) -> Membership {
        if y.is_exact() {
            return if self.contains(&y.point()) { Membership::In } else { Membership::Out };
        }
        match self {
            SpherePatch::Disc { center, radius } => {
                let d = y.distance(center, 64);
                if d.hi().to_rational() < *radius {
                    Membership::In
                } else if d.lo().to_rational() >= *radius {
                    Membership::Out
                } else {
                    Membership::Unknown
                }
            }
            SpherePatch::HalfPlane { normal, offset } => {
                let Some((c, r)) = primary_disc(y) else { return Membership::Unknown };
                let v = &normal.re * &c.re + &normal.im * &c.im - offset;
                let spread = (normal.re.abs() + normal.im.abs()) * r;
                if v > spread {
                    Membership::In
                } else if v <= -spread {
                    Membership::Out
                } else {
                    Membership::Unknown
                }
            }
        }
    }
}

/// The disc in the `z` chart; `None` if an inverted disc contains infinity.
fn primary_disc(y: &ChartPoint) -> Option<(GaussRat, BigRational)> {
    let r = y.radius.to_rational();
    match y.chart {
        Chart::Primary => Some((y.center.clone(), r)),
        Chart::Inverted => {
            // 1/w maps |w - c| <= r to the disc of center conj(c)/(|c|^2 - r^2) and radius r/(|c|^2 - r^2)
            let den = y.center.norm_sqr() - &r * &r;
            if !den.is_positive() {
                return None;
            }
            Some((y.center.conj().scale(&den.recip()), r / den))
        }
    }
}

/// Patches for a rational map, with the excluded set `f^-1(post f)`.
#[derive(Clone, Debug)]
pub struct SpherePatches {
    pub map: RationalMap,
    pub patches: Vec<SpherePatch>,
    pub excluded: Vec<PointBall>,
    /// Preimages are isolated in discs of chordal radius `2^-bits`.
    pub bits: u32,
}

impl SpherePatches {
    pub fn new(map: RationalMap, patches: Vec<SpherePatch>) -> Result<Self> {
        let post = match map.postcritical_orbit(64)? {
            Postcritical::Finite { post, .. } => post,
            Postcritical::Undecided => return Err(Error::Invalid("postcritical set is not finite within 64 steps".into())),
        };
        let mut excluded = Vec::new();
        for p in &post {
            for c in map.preimages(p, 64)? {
                excluded.push(c.ball());
            }
        }
        for e in &excluded {
            if e.radius.is_zero() {
                if let Some(k) = patches.iter().position(|s| s.contains(&e.center)) {
                    return Err(Error::Invalid(format!("patch {k} meets the excluded set at {}", e.center)));
                }
            }
        }
        Ok(SpherePatches { map, patches, excluded, bits: 60 })
    }

    /// The half-planes `Re z > 0` and `Re z < 0`, where `z^2 + c` is injective.
    pub fn half_planes(map: RationalMap) -> Result<Self> {
        let right = SpherePatch::HalfPlane { normal: GaussRat::one(), offset: BigRational::zero() };
        let left = SpherePatch::HalfPlane { normal: GaussRat::from_int(-1), offset: BigRational::zero() };
        Self::new(map, vec![right, left])
    }

    /// Every point of the disc is certainly outside the excluded set.
    pub fn off_excluded(&self, y: &ChartPoint) -> bool {
        self.excluded.iter().all(|e| y.distance(&e.center, 64).lo() > e.radius)
    }

    /// `J(y)` for a preimage disc `y` of the exact point `x`.
    pub fn jacobian_at_preimage(&self, j: &JacobianSpec, y: &ChartPoint, x: &SpherePoint, prec: i64) -> Result<BallReal> {
        match j {
            JacobianSpec::Const { .. } => j.combine(&BallReal::zero(), &BallReal::zero(), &BallReal::zero(), prec),
            JacobianSpec::Potential { phi, h, .. } => {
                j.combine(&phi.eval(y, prec + 4), &h.eval(y, prec + 4), &h.eval_point(x, prec + 4), prec)
            }
        }
    }
}

impl PatchSystem for SpherePatches {
    type Point = SpherePoint;
    type Pre = ChartPoint;

    fn patch_count(&self) -> usize {
        self.patches.len()
    }

    fn contains(&self, k: usize, p: &SpherePoint) -> bool {
        self.patches[k].contains(p)
    }

    fn preimages(&self, x: &SpherePoint) -> Result<Vec<ChartPoint>> {
        Ok(self.map.preimages(x, self.bits)?.into_iter().map(|c| c.point).collect())
    }

    fn pre_membership(&self, k: usize, y: &ChartPoint) -> Membership {
        self.patches[k].membership(y)
    }

    fn hat_at(&self, tau: &Hat<SpherePoint>, y: &ChartPoint, prec: i64) -> BallReal {
        tau.eval_distance(&y.distance(&tau.center, prec + 4), prec)
    }

    fn jacobian_at_point(&self, j: &JacobianSpec, x: &SpherePoint, prec: i64) -> Result<BallReal> {
        match j {
            JacobianSpec::Const { .. } => j.combine(&BallReal::zero(), &BallReal::zero(), &BallReal::zero(), prec),
            JacobianSpec::Potential { phi, h, .. } => {
                let tx = self.map.apply(x);
                j.combine(&phi.eval_point(x, prec + 4), &h.eval_point(x, prec + 4), &h.eval_point(&tx, prec + 4), prec)
            }
        }
    }
}

/// The open 1-tiles of a subdivision map, indexed like its charts.
#[derive(Clone, Debug)]
pub struct TilePatches {
    pub map: SubdivisionMap,
    /// Preimages of the postcritical set.
    pub excluded: Vec<TilePoint>,
}

impl TilePatches {
    pub fn new(map: SubdivisionMap) -> Self {
        let mut excluded: Vec<TilePoint> = map.postcritical_set().iter().flat_map(|p| map.preimages(p)).collect();
        excluded.sort();
        excluded.dedup();
        TilePatches { map, excluded }
    }
}

impl PatchSystem for TilePatches {
    type Point = TilePoint;
    type Pre = TilePoint;

    fn patch_count(&self) -> usize {
        self.map.charts.len()
    }

    fn contains(&self, k: usize, p: &TilePoint) -> bool {
        self.map.in_tile_interior(k, p)
    }

    fn preimages(&self, x: &TilePoint) -> Result<Vec<TilePoint>> {
        Ok(self.map.preimages(x))
    }

    fn pre_membership(&self, k: usize, y: &TilePoint) -> Membership {
        if self.map.in_tile_interior(k, y) {
            Membership::In
        } else {
            Membership::Out
        }
    }

    fn hat_at(&self, tau: &Hat<TilePoint>, y: &TilePoint, prec: i64) -> BallReal {
        tau.eval(y, prec)
    }

    fn jacobian_at_point(&self, j: &JacobianSpec, _x: &TilePoint, prec: i64) -> Result<BallReal> {
        match j {
            JacobianSpec::Const { value } => Ok(BallReal::from_rational(value, prec)),
            JacobianSpec::Potential { .. } => Err(Error::Invalid("tile maps take constant Jacobians".into())),
        }
    }
}
