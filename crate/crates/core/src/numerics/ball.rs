use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

/// Significant bits kept in a radius after it is rounded up.
const RAD_BITS: u64 = 30;

/// Midpoint-radius enclosure `[mid - rad, mid + rad]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallReal {
    pub mid: Dyadic,
    pub rad: Dyadic,
}

impl BallReal {
    pub fn new(mid: Dyadic, rad: Dyadic) -> Self {
        debug_assert!(rad.signum() >= 0);
        BallReal { mid, rad }
    }

    pub fn exact(mid: Dyadic) -> Self {
        BallReal { mid, rad: Dyadic::zero() }
    }

    pub fn zero() -> Self {
        Self::exact(Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::exact(Dyadic::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::exact(Dyadic::from_int(n))
    }

    /// Encloses `q` with radius at most `2^-(prec+1)`; exact when `q` is dyadic.
    pub fn from_rational(q: &BigRational, prec: i64) -> Self {
        if let Some(d) = Dyadic::try_from_rational(q) {
            return Self::exact(d);
        }
        let mid = Dyadic::from_rational(q, prec + 1, Round::Nearest);
        BallReal { mid, rad: Dyadic::pow2(-prec - 2) }
    }

    pub fn from_interval(lo: &Dyadic, hi: &Dyadic) -> Self {
        debug_assert!(lo <= hi);
        let mid = (lo + hi).half();
        let rad = (hi - lo).half();
        BallReal { mid, rad }
    }

    pub fn lo(&self) -> Dyadic {
        &self.mid - &self.rad
    }

    pub fn hi(&self) -> Dyadic {
        &self.mid + &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lo = self.lo().to_rational();
        let hi = self.hi().to_rational();
        lo <= *q && *q <= hi
    }

    /// True when the two enclosures share a point.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    /// True when `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Self) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    pub fn is_positive(&self) -> bool {
        self.lo().signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi().signum() < 0
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Certified `self < other`.
    pub fn lt(&self, other: &Self) -> bool {
        self.hi() < other.lo()
    }

    pub fn abs(&self) -> Self {
        if self.mid.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Upper bound on `|x|` for every `x` in the ball.
    pub fn mag(&self) -> Dyadic {
        &self.mid.abs() + &self.rad
    }

    /// Lower bound on `|x|` (zero if the ball straddles zero).
    pub fn mig(&self) -> Dyadic {
        let m = &self.mid.abs() - &self.rad;
        if m.is_negative() {
            Dyadic::zero()
        } else {
            m
        }
    }

    pub fn add_error(&self, err: &Dyadic) -> Self {
        BallReal { mid: self.mid.clone(), rad: round_up(&(&self.rad + &err.abs())) }
    }

    /// Rounds the midpoint to a multiple of `2^-prec`, folding the error into the radius.
    pub fn round(&self, prec: i64) -> Self {
        let mid = self.mid.round_abs(prec, Round::Nearest);
        let err = (&self.mid - &mid).abs();
        BallReal { mid, rad: round_up(&(&self.rad + &err)) }
    }

    /// Keeps `bits` significant bits of the midpoint.
    pub fn round_rel(&self, bits: u64) -> Self {
        let mid = self.mid.round_rel(bits, Round::Nearest);
        let err = (&self.mid - &mid).abs();
        BallReal { mid, rad: round_up(&(&self.rad + &err)) }
    }

    pub fn square(&self) -> Self {
        let a = self.abs();
        let mid = &a.mid * &a.mid;
        let rad = &(&(&a.mid * &a.rad) + &(&a.mid * &a.rad)) + &(&a.rad * &a.rad);
        BallReal { mid, rad: round_up(&rad) }
    }

    pub fn mul_rational(&self, q: &BigRational, prec: i64) -> Self {
        self * &BallReal::from_rational(q, prec)
    }

    /// `1/self`, failing when the ball contains zero.
    pub fn recip(&self, prec: i64) -> Result<Self> {
        let (lo, hi) = (self.lo(), self.hi());
        if lo.signum() <= 0 && hi.signum() >= 0 {
            return Err(Error::NonPositiveArgument);
        }
        // 1/x is decreasing on each sign component
        let one = BigRational::from_integer(1.into());
        let a = Dyadic::from_rational(&(&one / hi.to_rational()), prec, Round::Floor);
        let b = Dyadic::from_rational(&(&one / lo.to_rational()), prec, Round::Ceil);
        Ok(BallReal::from_interval(&a, &b))
    }

    pub fn div(&self, other: &Self, prec: i64) -> Result<Self> {
        if other.is_exact() {
            if let Some(k) = exact_pow2(&other.mid) {
                // division by a signed power of two is exact
                let s = if other.mid.is_negative() { -self.clone() } else { self.clone() };
                return Ok(BallReal { mid: s.mid.shl(-k), rad: s.rad.shl(-k) });
            }
        }
        let q = self.mid.to_rational() / other.mid.to_rational();
        let m = other.mig();
        if m.is_zero() {
            return Err(Error::NonPositiveArgument);
        }
        let mid = Dyadic::from_rational(&q, prec, Round::Nearest);
        // |a/b - a0/b0| <= (ra + |a0/b0| rb) / (|b0| - rb)
        let num = self.rad.to_rational() + q.abs() * other.rad.to_rational();
        let err = num / m.to_rational() + (q - mid.to_rational()).abs();
        let rad = Dyadic::from_rational(&err, prec + 8, Round::Ceil);
        Ok(BallReal { mid, rad: round_up(&rad) })
    }

    pub fn max(&self, other: &Self) -> Self {
        BallReal::from_interval(&Dyadic::max(&self.lo(), &other.lo()), &Dyadic::max(&self.hi(), &other.hi()))
    }

    pub fn min(&self, other: &Self) -> Self {
        BallReal::from_interval(&Dyadic::min(&self.lo(), &other.lo()), &Dyadic::min(&self.hi(), &other.hi()))
    }

    /// Smallest ball containing both.
    pub fn hull(&self, other: &Self) -> Self {
        BallReal::from_interval(&Dyadic::min(&self.lo(), &other.lo()), &Dyadic::max(&self.hi(), &other.hi()))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }
}

fn exact_pow2(d: &Dyadic) -> Option<i64> {
    if d.mantissa().magnitude().bits() == 1 {
        Some(d.exponent())
    } else {
        None
    }
}

/// Rounds a nonnegative radius upward to a short mantissa.
pub(crate) fn round_up(r: &Dyadic) -> Dyadic {
    r.round_rel(RAD_BITS, Round::Ceil)
}

impl Add for &BallReal {
    type Output = BallReal;
    fn add(self, rhs: &BallReal) -> BallReal {
        BallReal { mid: &self.mid + &rhs.mid, rad: round_up(&(&self.rad + &rhs.rad)) }
    }
}

impl Sub for &BallReal {
    type Output = BallReal;
    fn sub(self, rhs: &BallReal) -> BallReal {
        BallReal { mid: &self.mid - &rhs.mid, rad: round_up(&(&self.rad + &rhs.rad)) }
    }
}

impl Mul for &BallReal {
    type Output = BallReal;
    fn mul(self, rhs: &BallReal) -> BallReal {
        let mid = &self.mid * &rhs.mid;
        if self.rad.is_zero() && rhs.rad.is_zero() {
            return BallReal::exact(mid);
        }
        let rad = &(&(&self.mid.abs() * &rhs.rad) + &(&rhs.mid.abs() * &self.rad)) + &(&self.rad * &rhs.rad);
        BallReal { mid, rad: round_up(&rad) }
    }
}

impl Neg for &BallReal {
    type Output = BallReal;
    fn neg(self) -> BallReal {
        BallReal { mid: -&self.mid, rad: self.rad.clone() }
    }
}

impl Neg for BallReal {
    type Output = BallReal;
    fn neg(self) -> BallReal {
        BallReal { mid: -self.mid, rad: self.rad }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: BallReal) -> BallReal { (&self).$m(&rhs) }
        }
        impl $tr<&BallReal> for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: &BallReal) -> BallReal { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for BallReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e} ± {:.3e}", self.mid.to_f64(), self.rad.to_f64())
    }
}

impl From<Dyadic> for BallReal {
    fn from(d: Dyadic) -> Self {
        BallReal::exact(d)
    }
}

impl Zero for BallReal {
    fn zero() -> Self {
        BallReal::zero()
    }
    fn is_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }
}
