//! Polynomials with Gaussian-rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::numerics::{ComplexBall, GaussRat};

/// Coefficients in increasing degree; the last one is nonzero unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<GaussRat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<GaussRat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: GaussRat) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(GaussRat::one())
    }

    /// The polynomial `z`.
    pub fn z() -> Self {
        Poly::new(vec![GaussRat::zero(), GaussRat::one()])
    }

    /// `z - a`.
    pub fn linear(a: &GaussRat) -> Self {
        Poly::new(vec![-a, GaussRat::one()])
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial given degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn lc(&self) -> GaussRat {
        self.coeffs.last().cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn coeff(&self, k: usize) -> GaussRat {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn eval(&self, z: &GaussRat) -> GaussRat {
        self.coeffs.iter().rev().fold(GaussRat::zero(), |acc, c| &(&acc * z) + c)
    }

    /// Horner evaluation on balls, keeping `bits` significant bits per step.
    pub fn eval_ball(&self, z: &ComplexBall, prec: i64, bits: u64) -> ComplexBall {
        let mut acc = ComplexBall::zero();
        for c in self.coeffs.iter().rev() {
            acc = (&(&acc * z) + &c.to_ball(prec)).round_rel(bits);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(&BigRational::from_integer(k.into())))
                .collect(),
        )
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.lc().inv() {
            Some(inv) => self.scale(&inv),
            None => Poly::zero(),
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let inv = d.lc().inv().expect("nonzero");
        let dd = d.degree();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![GaussRat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&c * dc);
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.monic(), b.monic());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic();
        }
        a
    }

    /// Squarefree decomposition `lc * prod g_k^k` (Yun); returns the nonconstant `(g_k, k)`.
    pub fn squarefree(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let d = f.derivative();
        let a0 = Poly::gcd(&f, &d);
        let mut b = f.div_rem(&a0).0;
        let mut c = d.div_rem(&a0).0;
        let mut dd = &c - &b.derivative();
        let mut k = 1;
        while b.degree() > 0 {
            let a = Poly::gcd(&b, &dd);
            if a.degree() > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            c = dd.div_rem(&a).0;
            dd = &c - &b.derivative();
            k += 1;
        }
        out
    }

    /// `z^n p(1/z)`, the polynomial seen from the chart at infinity.
    pub fn reversed(&self, n: usize) -> Poly {
        assert!(n >= self.degree());
        Poly::new((0..=n).map(|k| self.coeff(n - k)).collect())
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![GaussRat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let real_neg = c.im.is_zero() && c.re.is_negative();
            let c_abs = if real_neg { -c } else { c.clone() };
            if first {
                if real_neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if real_neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = c_abs == GaussRat::one();
            let coef = if c_abs.im.is_zero() { c_abs.to_string() } else { format!("({c_abs})") };
            match (k, unit) {
                (0, _) => write!(f, "{coef}")?,
                (_, true) => {}
                _ => write!(f, "{coef}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat_int;

    fn p(cs: &[i64]) -> Poly {
        Poly::new(cs.iter().map(|&c| GaussRat::real(rat_int(c))).collect())
    }

    #[test]
    fn division_identity() {
        let a = p(&[1, 0, -3, 2, 5]);
        let b = p(&[2, 1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn yun_recovers_multiplicities() {
        // (z-1)^3 (z+2)^2 (z-i)
        let l = |a: GaussRat| Poly::linear(&a);
        let one = l(GaussRat::one());
        let two = l(GaussRat::from_int(-2));
        let i = l(GaussRat::i());
        let f = &(&(&(&one * &one) * &one) * &(&two * &two)) * &i;
        let f = f.scale(&GaussRat::from_int(7));
        let sf = f.squarefree();
        let want = vec![(i, 1), (two, 2), (one, 3)];
        assert_eq!(sf, want);
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(p(&[-2, 0, 1]).to_string(), "z^2 - 2");
        assert_eq!(p(&[1, -3]).to_string(), "-3*z + 1");
    }
}
