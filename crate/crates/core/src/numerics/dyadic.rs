use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Rounding direction for [`Dyadic`] operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Floor,
    Ceil,
    Nearest,
}

/// An exact number `man * 2^exp`. The mantissa is odd unless the value is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

pub(crate) fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// `floor(n / 2^k)` or the chosen rounding of it.
pub(crate) fn shr_round(n: &BigInt, k: u64, mode: Round) -> BigInt {
    if k == 0 {
        return n.clone();
    }
    let floor = n >> k;
    match mode {
        Round::Floor => floor,
        Round::Ceil => {
            if (&floor << k) == *n {
                floor
            } else {
                floor + 1
            }
        }
        Round::Nearest => {
            let twice = n >> (k - 1);
            // twice = floor(2n / 2^k); the low bit says whether the remainder is at least one half
            if twice.is_odd() {
                floor + 1
            } else {
                floor
            }
        }
    }
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { man, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.man.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.man.trailing_zeros() {
            if tz > 0 {
                self.man >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { man: BigInt::one(), exp: 0 }
    }

    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        Dyadic::new(n.into(), 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { man: BigInt::one(), exp: k }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.man.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { man: self.man.abs(), exp: self.exp }
    }

    /// Multiplies by `2^k`.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { man: self.man.clone(), exp: self.exp + k }
    }

    /// Smallest `e` with `|self| < 2^e`; `i64::MIN` for zero.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.man.bits() as i64 + self.exp
        }
    }

    /// The integer `self * 2^scale`, rounded as requested.
    pub fn scaled_int(&self, scale: i64, mode: Round) -> BigInt {
        let e = self.exp + scale;
        if e >= 0 {
            &self.man << (e as u64)
        } else {
            shr_round(&self.man, (-e) as u64, mode)
        }
    }

    /// Rounds to a multiple of `2^-prec`.
    pub fn round_abs(&self, prec: i64, mode: Round) -> Self {
        if self.exp >= -prec {
            return self.clone();
        }
        Dyadic::new(self.scaled_int(prec, mode), -prec)
    }

    /// Rounds to at most `bits` significant bits.
    pub fn round_rel(&self, bits: u64, mode: Round) -> Self {
        let have = self.man.bits();
        if have <= bits {
            return self.clone();
        }
        let drop = (have - bits) as i64;
        Dyadic::new(self.scaled_int(-(self.exp + drop), mode), self.exp + drop)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << (self.exp as u64))
        } else {
            BigRational::new(self.man.clone(), pow2((-self.exp) as u64))
        }
    }

    /// Rounds a rational to a multiple of `2^-prec`.
    pub fn from_rational(q: &BigRational, prec: i64, mode: Round) -> Self {
        let (n, d) = (q.numer(), q.denom());
        let scaled = if prec >= 0 { n << (prec as u64) } else { n.clone() };
        let d = if prec >= 0 { d.clone() } else { d << ((-prec) as u64) };
        let (fl, rem) = scaled.div_mod_floor(&d);
        let v = if rem.is_zero() {
            fl
        } else {
            match mode {
                Round::Floor => fl,
                Round::Ceil => fl + 1,
                Round::Nearest => {
                    if (rem * 2u32) >= d {
                        fl + 1
                    } else {
                        fl
                    }
                }
            }
        };
        Dyadic::new(v, -prec)
    }

    /// Exact value of a dyadic rational, if it is one.
    pub fn try_from_rational(q: &BigRational) -> Option<Self> {
        let d = q.denom();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz).is_one() {
            Some(Dyadic::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1 << 52), e - 1075) };
        Some(Dyadic::new(BigInt::from(sign * m), ex))
    }

    /// Nearest `f64` (up to one rounding of the mantissa).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits() as i64;
        let drop = (bits - 60).max(0);
        let m = (&self.man >> (drop as u64)).to_f64().unwrap_or(f64::NAN);
        let e = self.exp + drop;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * 2f64.powi(e.clamp(-1000, 1000) as i32) * 2f64.powi((e - e.clamp(-1000, 1000)) as i32)
    }

    pub fn half(&self) -> Self {
        self.shl(-1)
    }

    pub fn max(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // quick magnitude test before aligning
        let (ma, mb) = (self.magnitude(), other.magnitude());
        if ma != mb {
            let c = ma.cmp(&mb);
            return if sa > 0 { c } else { c.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &other.man << ((other.exp - e) as u64);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(rhs.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &rhs.man << ((rhs.exp - e) as u64);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { man: -&self.man, exp: self.exp }
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { man: &self.man * &rhs.man, exp: self.exp + rhs.exp }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic { (&self).$m(&rhs) }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &Dyadic) -> Dyadic { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { man: -self.man, exp: self.exp }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.man, self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad dyadic `{s}`"));
        let s = s.trim();
        match s.split_once("*2^") {
            Some((m, e)) => {
                let m: BigInt = m.trim().parse().map_err(|_| bad())?;
                let e: i64 = e.trim().parse().map_err(|_| bad())?;
                Ok(Dyadic::new(m, e))
            }
            None => {
                let m: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Dyadic::new(m, 0))
            }
        }
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
