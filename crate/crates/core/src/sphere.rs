//! The Riemann sphere with the chordal metric.
//!
//! Ideal points are the Gaussian rationals; they are enumerated by pairing
//! two copies of a Calkin–Wilf enumeration of the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, q_to_f64, sqrt_rational, BallReal, ComplexBall, Dyadic, GaussRat};

/// A point of the Riemann sphere with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpherePoint {
    Finite(GaussRat),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: BigRational, im: BigRational) -> Self {
        SpherePoint::Finite(GaussRat::new(re, im))
    }

    pub fn real(x: BigRational) -> Self {
        SpherePoint::Finite(GaussRat::real(x))
    }

    pub fn from_int(n: i64) -> Self {
        SpherePoint::Finite(GaussRat::from_int(n))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&GaussRat> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Image of `z` under `z -> 1/z`, with `0 <-> inf`.
    pub fn invert(&self) -> SpherePoint {
        match self {
            SpherePoint::Infinity => SpherePoint::from_int(0),
            SpherePoint::Finite(z) => match z.inv() {
                Some(w) => SpherePoint::Finite(w),
                None => SpherePoint::Infinity,
            },
        }
    }

    /// Point on the unit sphere in R^3 under inverse stereographic projection.
    pub fn to_xyz(&self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let (x, y) = z.to_f64();
                let n = q_to_f64(&z.norm_sqr());
                let d = 1.0 + n;
                [2.0 * x / d, 2.0 * y / d, (n - 1.0) / d]
            }
        }
    }
}

/// Squared chordal distance, exact.
pub fn chordal_sq(a: &SpherePoint, b: &SpherePoint) -> BigRational {
    let one = BigRational::one();
    let four = BigRational::from_integer(4.into());
    match (a, b) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => BigRational::zero(),
        (SpherePoint::Infinity, SpherePoint::Finite(z)) | (SpherePoint::Finite(z), SpherePoint::Infinity) => {
            four / (one + z.norm_sqr())
        }
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            let d = (z - w).norm_sqr();
            four * d / ((&one + z.norm_sqr()) * (&one + w.norm_sqr()))
        }
    }
}

/// Chordal distance `2|z-w| / sqrt((1+|z|^2)(1+|w|^2))`, radius at most `2^-prec`.
pub fn chordal_distance(a: &SpherePoint, b: &SpherePoint, prec: i64) -> BallReal {
    sqrt_rational(&chordal_sq(a, b), prec).expect("squared distance is nonnegative")
}

/// Exact test `sigma(p, c) <= r`.
pub fn in_chordal_disc(p: &SpherePoint, c: &SpherePoint, r: &BigRational) -> bool {
    !r.is_negative() && chordal_sq(p, c) <= r * r
}

/// Chordal distance between a finite point given as a complex ball and an exact point.
///
/// Uses that the chordal metric is 2-Lipschitz with respect to the Euclidean one.
pub fn chordal_distance_ball(z: &ComplexBall, b: &SpherePoint, prec: i64) -> BallReal {
    let c = SpherePoint::Finite(z.mid_exact());
    let d = chordal_distance(&c, b, prec);
    d.add_error(&z.disc_radius().shl(1))
}

/// Stern's diatomic pair `(s(n), s(n+1))`.
pub fn stern_pair(n: u64) -> (BigInt, BigInt) {
    stern_pair_big(&BigInt::from(n))
}

fn stern_pair_big(n: &BigInt) -> (BigInt, BigInt) {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for k in (0..n.bits()).rev() {
        if n.bit(k) {
            a = &a + &b;
        } else {
            b = &a + &b;
        }
    }
    (a, b)
}

/// The `n`-th positive rational in Calkin–Wilf order, `n >= 1`.
pub fn calkin_wilf(n: u64) -> BigRational {
    assert!(n >= 1, "Calkin-Wilf index starts at 1");
    let (a, b) = stern_pair(n);
    BigRational::new(a, b)
}

/// Position of a positive rational in Calkin–Wilf order.
pub fn calkin_wilf_index(q: &BigRational) -> BigInt {
    assert!(q.is_positive(), "only positive rationals have a Calkin-Wilf index");
    let (mut a, mut b) = (q.numer().clone(), q.denom().clone());
    // walk to the root; runs of equal steps are taken in one division
    let mut bits: Vec<(bool, BigInt)> = Vec::new();
    while a != b {
        if a < b {
            let k = (&b - BigInt::one()) / &a;
            b -= &a * &k;
            bits.push((false, k));
        } else {
            let k = (&a - BigInt::one()) / &b;
            a -= &b * &k;
            bits.push((true, k));
        }
    }
    let mut n = BigInt::one();
    for (bit, k) in bits.into_iter().rev() {
        let k = k.to_u64().expect("run length fits in u64");
        n <<= k;
        if bit {
            n += (BigInt::one() << k) - 1;
        }
    }
    n
}

fn rational_enumerate_big(m: &BigInt) -> BigRational {
    if m.is_zero() {
        return BigRational::zero();
    }
    let j: BigInt = (m + 1) >> 1;
    let (a, b) = stern_pair_big(&j);
    let q = BigRational::new(a, b);
    if m.bit(0) {
        q
    } else {
        -q
    }
}

/// Bijection from the naturals onto the rationals: 0, 1, -1, 1/2, -1/2, 2, -2, ...
pub fn rational_enumerate(m: u64) -> BigRational {
    rational_enumerate_big(&BigInt::from(m))
}

/// Inverse of [`rational_enumerate`].
pub fn rational_index(q: &BigRational) -> BigInt {
    if q.is_zero() {
        return BigInt::zero();
    }
    let j = calkin_wilf_index(&q.abs());
    if q.is_positive() {
        2 * j - 1
    } else {
        2 * j
    }
}

fn cantor_unpair_big(n: &BigInt) -> (BigInt, BigInt) {
    let r: BigInt = Roots::sqrt(&(n * BigInt::from(8) + BigInt::one()));
    let w: BigInt = (r - 1u32) / 2u32;
    let t = &w * (&w + 1) / 2;
    let b = n - t;
    (&w - &b, b)
}

/// Inverse of the Cantor pairing `(a, b) -> (a+b)(a+b+1)/2 + b`.
pub fn cantor_unpair(n: u64) -> (u64, u64) {
    let n = n as u128;
    let w = ((8 * n + 1).sqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let b = n - t;
    ((w - b) as u64, b as u64)
}

/// The `k`-th ideal point, `k >= 1`; `k = 1` gives `0`.
pub fn ideal_enumerate(k: u64) -> SpherePoint {
    ideal_enumerate_big(&BigInt::from(k))
}

/// [`ideal_enumerate`] for indices beyond `u64`.
pub fn ideal_enumerate_big(k: &BigInt) -> SpherePoint {
    assert!(k.is_positive(), "ideal points are indexed from 1");
    let (m1, m2) = cantor_unpair_big(&(k - 1));
    SpherePoint::finite(rational_enumerate_big(&m1), rational_enumerate_big(&m2))
}

/// Index of a finite point in [`ideal_enumerate`]; `None` for infinity.
pub fn ideal_index(p: &SpherePoint) -> Option<BigInt> {
    let z = p.as_finite()?;
    let (a, b) = (rational_index(&z.re), rational_index(&z.im));
    let s = &a + &b;
    Some(&s * (&s + 1) / 2 + b + 1)
}

/// An ideal point with a chordal radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointBall {
    pub center: SpherePoint,
    pub radius: Dyadic,
}

impl PointBall {
    pub fn exact(center: SpherePoint) -> Self {
        PointBall { center, radius: Dyadic::zero() }
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        chordal_sq(&self.center, p) <= (&self.radius * &self.radius).to_rational()
    }
}

/// A point of the sphere presented by approximations: `query(t)` is within `2^-t` of it.
pub trait PointOracle {
    fn query(&self, t: u32) -> SpherePoint;
}

/// Oracle for a point known exactly.
#[derive(Clone, Debug)]
pub struct ExactOracle(pub SpherePoint);

impl PointOracle for ExactOracle {
    fn query(&self, t: u32) -> SpherePoint {
        match &self.0 {
            // 2^(t+1) is within 2 / sqrt(1 + 4^(t+1)) < 2^-t of infinity
            SpherePoint::Infinity => SpherePoint::real(BigRational::from_integer(BigInt::one() << (t + 1))),
            p => p.clone(),
        }
    }
}

pub fn oracle_of(p: &SpherePoint) -> ExactOracle {
    ExactOracle(p.clone())
}

/// Oracle built from a function returning ever better approximations.
pub struct FnOracle<F: Fn(u32) -> SpherePoint>(pub F);

impl<F: Fn(u32) -> SpherePoint> PointOracle for FnOracle<F> {
    fn query(&self, t: u32) -> SpherePoint {
        (self.0)(t)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(z) => write!(f, "{z}"),
        }
    }
}

impl std::str::FromStr for SpherePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            Ok(SpherePoint::Infinity)
        } else {
            Ok(SpherePoint::Finite(t.parse()?))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FiniteJson {
    re: String,
    im: String,
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Infinity => s.serialize_str("inf"),
            SpherePoint::Finite(z) => FiniteJson {
                re: crate::numerics::format_rational(&z.re),
                im: crate::numerics::format_rational(&z.im),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(D::Error::custom),
            serde_json::Value::Object(_) => {
                let f: FiniteJson = serde_json::from_value(v).map_err(D::Error::custom)?;
                let re = parse_rational(&f.re).map_err(D::Error::custom)?;
                let im = parse_rational(&f.im).map_err(D::Error::custom)?;
                Ok(SpherePoint::finite(re, im))
            }
            _ => Err(D::Error::custom("expected \"inf\" or {\"re\",\"im\"}")),
        }
    }
}
