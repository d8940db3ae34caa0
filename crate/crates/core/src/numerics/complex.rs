use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::ball::{round_up, BallReal};
use super::dyadic::Dyadic;
use super::rational::GaussRat;
use crate::error::Result;

/// Rectangular complex enclosure: a ball for each of the real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexBall {
    pub re: BallReal,
    pub im: BallReal,
}

impl ComplexBall {
    pub fn new(re: BallReal, im: BallReal) -> Self {
        ComplexBall { re, im }
    }

    pub fn exact(re: Dyadic, im: Dyadic) -> Self {
        ComplexBall { re: BallReal::exact(re), im: BallReal::exact(im) }
    }

    pub fn zero() -> Self {
        Self::exact(Dyadic::zero(), Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::exact(Dyadic::one(), Dyadic::zero())
    }

    /// Disc around `(cre, cim)` of radius `r`, enclosed by its bounding square.
    pub fn disc(cre: Dyadic, cim: Dyadic, r: Dyadic) -> Self {
        ComplexBall { re: BallReal::new(cre, r.clone()), im: BallReal::new(cim, r) }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Self::exact(Dyadic::from_f64(re).unwrap_or_else(Dyadic::zero), Dyadic::from_f64(im).unwrap_or_else(Dyadic::zero))
    }

    pub fn is_exact(&self) -> bool {
        self.re.is_exact() && self.im.is_exact()
    }

    /// Midpoint as an exact Gaussian rational.
    pub fn mid_exact(&self) -> GaussRat {
        GaussRat::new(self.re.mid.to_rational(), self.im.mid.to_rational())
    }

    pub fn mid(&self) -> ComplexBall {
        Self::exact(self.re.mid.clone(), self.im.mid.clone())
    }

    /// Radius of a disc around the midpoint containing the rectangle.
    pub fn disc_radius(&self) -> Dyadic {
        &self.re.rad + &self.im.rad
    }

    pub fn norm_sqr(&self) -> BallReal {
        &self.re.square() + &self.im.square()
    }

    /// Upper bound on `|z|` over the enclosure.
    pub fn mag(&self) -> Dyadic {
        &self.re.mag() + &self.im.mag()
    }

    pub fn abs(&self, prec: i64) -> BallReal {
        self.norm_sqr().sqrt(prec).expect("norm is nonnegative")
    }

    /// True when zero is certainly outside.
    pub fn excludes_zero(&self) -> bool {
        !self.re.contains_zero() || !self.im.contains_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexBall { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, k: &BallReal) -> Self {
        ComplexBall { re: &self.re * k, im: &self.im * k }
    }

    pub fn recip(&self, prec: i64) -> Result<Self> {
        let n = self.norm_sqr();
        let inv = n.recip(prec)?;
        Ok(ComplexBall { re: &self.re * &inv, im: -(&self.im * &inv) })
    }

    pub fn div(&self, other: &Self, prec: i64) -> Result<Self> {
        Ok(self * &other.recip(prec)?)
    }

    pub fn round_rel(&self, bits: u64) -> Self {
        ComplexBall { re: self.re.round_rel(bits), im: self.im.round_rel(bits) }
    }

    pub fn round(&self, prec: i64) -> Self {
        ComplexBall { re: self.re.round(prec), im: self.im.round(prec) }
    }

    /// Enlarges both radii by `e`.
    pub fn widen(&self, e: &Dyadic) -> Self {
        ComplexBall { re: self.re.add_error(e), im: self.im.add_error(e) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn contains(&self, z: &GaussRat) -> bool {
        self.re.contains_rational(&z.re) && self.im.contains_rational(&z.im)
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.re.overlaps(&other.re) && self.im.overlaps(&other.im)
    }
}

impl Add for &ComplexBall {
    type Output = ComplexBall;
    fn add(self, o: &ComplexBall) -> ComplexBall {
        ComplexBall { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &ComplexBall {
    type Output = ComplexBall;
    fn sub(self, o: &ComplexBall) -> ComplexBall {
        ComplexBall { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &ComplexBall {
    type Output = ComplexBall;
    fn mul(self, o: &ComplexBall) -> ComplexBall {
        if self.is_exact() && o.is_exact() {
            let (a, b, c, d) = (&self.re.mid, &self.im.mid, &o.re.mid, &o.im.mid);
            return ComplexBall::exact(&(a * c) - &(b * d), &(a * d) + &(b * c));
        }
        ComplexBall { re: &(&self.re * &o.re) - &(&self.im * &o.im), im: &(&self.re * &o.im) + &(&self.im * &o.re) }
    }
}

impl Neg for &ComplexBall {
    type Output = ComplexBall;
    fn neg(self) -> ComplexBall {
        ComplexBall { re: -&self.re, im: -&self.im }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for ComplexBall {
            type Output = ComplexBall;
            fn $m(self, rhs: ComplexBall) -> ComplexBall { (&self).$m(&rhs) }
        }
        impl $tr<&ComplexBall> for ComplexBall {
            type Output = ComplexBall;
            fn $m(self, rhs: &ComplexBall) -> ComplexBall { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

/// Upper bound, as a short dyadic, on the Euclidean distance between two exact points.
pub fn dist_upper(a: (&Dyadic, &Dyadic), b: (&Dyadic, &Dyadic)) -> Dyadic {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    let sq = &(&dx * &dx) + &(&dy * &dy);
    round_up(&super::elementary::sqrt_point(&sq, 64).expect("square").hi())
}
