//! Certified `sqrt`, `exp` and `log` on balls.
//!
//! Each point evaluation runs fixed-point interval arithmetic at scale `2^w`
//! (every intermediate is a floor/ceil pair of integers) and retries with a
//! wider scale until the enclosure is narrow enough.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ball::BallReal;
use super::dyadic::{pow2, Dyadic, Round};
use crate::error::{Error, Result};

/// Give up after this many working bits.
const MAX_WORK_BITS: i64 = 1 << 16;

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// Nonnegative fixed-point interval `[lo, hi] / 2^w`.
#[derive(Clone, Debug)]
struct Fix {
    lo: BigInt,
    hi: BigInt,
}

impl Fix {
    fn mul(&self, o: &Fix, w: u64) -> Fix {
        Fix { lo: (&self.lo * &o.lo) >> w, hi: ceil_shr(&(&self.hi * &o.hi), w) }
    }

    fn to_ball(&self, w: u64) -> BallReal {
        let w = w as i64;
        BallReal::from_interval(&Dyadic::new(self.lo.clone(), -w), &Dyadic::new(self.hi.clone(), -w))
    }
}

fn ceil_shr(n: &BigInt, k: u64) -> BigInt {
    super::dyadic::shr_round(n, k, Round::Ceil)
}

fn done(b: &BallReal, prec: i64) -> bool {
    b.rad <= Dyadic::pow2(-prec - 1)
}

/// `sqrt(x)` for an exact `x >= 0`, radius at most `2^-(prec+1)`.
pub fn sqrt_point(x: &Dyadic, prec: i64) -> Result<BallReal> {
    if x.is_negative() {
        return Err(Error::NonPositiveArgument);
    }
    if x.is_zero() {
        return Ok(BallReal::zero());
    }
    let w = (prec + 2).max(0);
    let lo_in = x.scaled_int(2 * w, Round::Floor);
    let hi_in = x.scaled_int(2 * w, Round::Ceil);
    let lo = lo_in.sqrt();
    let mut hi = hi_in.sqrt();
    if &hi * &hi < hi_in {
        hi += 1;
    }
    Ok(Fix { lo, hi }.to_ball(w as u64))
}

/// `sqrt(q)` for an exact rational `q >= 0`.
pub fn sqrt_rational(q: &num_rational::BigRational, prec: i64) -> Result<BallReal> {
    if q.is_negative() {
        return Err(Error::NonPositiveArgument);
    }
    let w = (prec + 2).max(0);
    let lo_in = Dyadic::from_rational(q, 2 * w, Round::Floor).scaled_int(2 * w, Round::Floor);
    let hi_in = Dyadic::from_rational(q, 2 * w, Round::Ceil).scaled_int(2 * w, Round::Ceil);
    let lo = lo_in.sqrt();
    let mut hi = hi_in.sqrt();
    if &hi * &hi < hi_in {
        hi += 1;
    }
    Ok(Fix { lo, hi }.to_ball(w as u64))
}

/// Encloses `e^t` for `0 <= t <= 2^-10` given as an interval.
fn exp_small(t: &Fix, w: u64) -> Fix {
    let one = pow2(w);
    let (mut slo, mut shi) = (one.clone(), one.clone());
    let (mut tlo, mut thi) = (one.clone(), one);
    let mut k: u32 = 1;
    loop {
        tlo = (&tlo * &t.lo) >> w;
        tlo /= k;
        thi = ceil_div(&ceil_shr(&(&thi * &t.hi), w), &BigInt::from(k));
        slo += &tlo;
        shi += &thi;
        if thi <= BigInt::one() {
            // tail after term k is at most term_k * t / (1 - t) < term_k
            shi += &thi + 1;
            break;
        }
        k += 1;
    }
    Fix { lo: slo, hi: shi }
}

fn exp_fix(x: &Dyadic, w: u64) -> Fix {
    let a = x.abs();
    let s = (a.magnitude() + 10).max(0) as u64;
    let t = a.shl(-(s as i64));
    let tf = Fix { lo: t.scaled_int(w as i64, Round::Floor), hi: t.scaled_int(w as i64, Round::Ceil) };
    let mut y = exp_small(&tf, w);
    for _ in 0..s {
        y = y.mul(&y, w);
    }
    if x.is_negative() {
        let two_w = pow2(2 * w);
        y = Fix { lo: &two_w / &y.hi, hi: ceil_div(&two_w, &y.lo) };
    }
    y
}

/// `e^x` for exact `x`, radius at most `2^-(prec+1)`.
pub fn exp_point(x: &Dyadic, prec: i64) -> Result<BallReal> {
    if x.is_zero() {
        return Ok(BallReal::one());
    }
    let mag = x.magnitude().max(0);
    // e^x is about 2^(1.45 x); absolute error scales with it
    let growth = if x.is_negative() { 0 } else { (x.to_f64() * 1.45).ceil() as i64 };
    let mut w = (prec + 2 * mag + growth + 40).max(64);
    loop {
        let b = exp_fix(x, w as u64).to_ball(w as u64);
        if done(&b, prec) {
            return Ok(b);
        }
        w += w / 2 + 32;
        if w > MAX_WORK_BITS {
            return Err(Error::PrecisionExhausted { bits: w as u64 });
        }
    }
}

/// `sum_{j>=0} z^(2j+1)/(2j+1)` for a nonnegative interval `z <= 1/3`.
fn atanh_series(z: &Fix, w: u64) -> Fix {
    let z2 = z.mul(z, w);
    let mut p = z.clone();
    let (mut slo, mut shi) = (BigInt::zero(), BigInt::zero());
    let mut j: u64 = 0;
    loop {
        let d = BigInt::from(2 * j + 1);
        slo += &p.lo / &d;
        shi += ceil_div(&p.hi, &d);
        p = p.mul(&z2, w);
        if p.hi <= BigInt::one() {
            // remaining terms sum to less than 2 * p.hi
            shi += &p.hi * 2 + 1;
            break;
        }
        j += 1;
    }
    Fix { lo: slo, hi: shi }
}

fn ln2_fix(w: u64) -> Fix {
    let one = pow2(w);
    let three = BigInt::from(3);
    let z = Fix { lo: &one / &three, hi: ceil_div(&one, &three) };
    let s = atanh_series(&z, w);
    Fix { lo: s.lo * 2, hi: s.hi * 2 }
}

/// Signed fixed-point log interval; `lo`/`hi` may be negative.
fn log_fix(x: &Dyadic, w: u64) -> (BigInt, BigInt) {
    let k = x.magnitude() - 1;
    let m = x.shl(-k);
    // m in [1, 2)
    let num = &m - &Dyadic::one();
    let den = &m + &Dyadic::one();
    let e = num.exponent().min(den.exponent());
    let (n, d) = (num.scaled_int(-e, Round::Floor), den.scaled_int(-e, Round::Floor));
    let n = n << w;
    let z = Fix { lo: &n / &d, hi: ceil_div(&n, &d) };
    let s = atanh_series(&z, w);
    let (llo, lhi) = (s.lo * 2, s.hi * 2);
    if k == 0 {
        return (llo, lhi);
    }
    let l2 = ln2_fix(w);
    let kb = BigInt::from(k);
    if k > 0 {
        (&kb * &l2.lo + llo, &kb * &l2.hi + lhi)
    } else {
        (&kb * &l2.hi + llo, &kb * &l2.lo + lhi)
    }
}

/// `log x` for exact `x > 0`, radius at most `2^-(prec+1)`.
pub fn log_point(x: &Dyadic, prec: i64) -> Result<BallReal> {
    if x.signum() <= 0 {
        return Err(Error::NonPositiveArgument);
    }
    if *x == Dyadic::one() {
        return Ok(BallReal::zero());
    }
    let kbits = 64 - (x.magnitude().unsigned_abs()).leading_zeros() as i64;
    let mut w = (prec + kbits + 40).max(64);
    loop {
        let (lo, hi) = log_fix(x, w as u64);
        let b = BallReal::from_interval(&Dyadic::new(lo, -w), &Dyadic::new(hi, -w));
        if done(&b, prec) {
            return Ok(b);
        }
        w += w / 2 + 32;
        if w > MAX_WORK_BITS {
            return Err(Error::PrecisionExhausted { bits: w as u64 });
        }
    }
}

/// `log 2` with radius at most `2^-(prec+1)`.
pub fn ln2(prec: i64) -> BallReal {
    let w = (prec + 40).max(64) as u64;
    let f = ln2_fix(w);
    f.to_ball(w)
}

impl BallReal {
    /// Encloses `sqrt(x)` for every `x >= 0` in the ball.
    pub fn sqrt(&self, prec: i64) -> Result<BallReal> {
        let hi = self.hi();
        if hi.is_negative() {
            return Err(Error::NonPositiveArgument);
        }
        let lo = self.lo();
        let a = if lo.signum() <= 0 { Dyadic::zero() } else { sqrt_point(&lo, prec + 1)?.lo() };
        let b = sqrt_point(&hi, prec + 1)?.hi();
        Ok(BallReal::from_interval(&a, &b))
    }

    /// Encloses `e^x` over the ball; radius at most `2^-prec + e^hi * rad`.
    pub fn exp(&self, prec: i64) -> Result<BallReal> {
        if self.is_exact() {
            return exp_point(&self.mid, prec);
        }
        let a = exp_point(&self.lo(), prec + 1)?.lo();
        let b = exp_point(&self.hi(), prec + 1)?.hi();
        Ok(BallReal::from_interval(&a, &b))
    }

    /// Encloses `log x` over the ball, which must be certifiably positive.
    pub fn log(&self, prec: i64) -> Result<BallReal> {
        if !self.is_positive() {
            return Err(Error::NonPositiveArgument);
        }
        if self.is_exact() {
            return log_point(&self.mid, prec);
        }
        let a = log_point(&self.lo(), prec + 1)?.lo();
        let b = log_point(&self.hi(), prec + 1)?.hi();
        Ok(BallReal::from_interval(&a, &b))
    }
}
