//! Certified root isolation.
//!
//! Roots are approximated in floating point (Aberth iteration), polished by
//! Weierstrass steps at increasing precision, and then certified with the
//! Gerschgorin-type inclusion: for a degree-`n` polynomial with leading
//! coefficient `a` and distinct approximations `z_i`, every root lies in a disc
//! `|z - z_i| <= n |W_i|`, `W_i = p(z_i) / (a prod_{j != i} (z_i - z_j))`, and a
//! union of `m` discs disjoint from the others holds exactly `m` roots.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::numerics::{sqrt_rational, BallReal, ComplexBall, Dyadic, GaussRat, Round};
use crate::sphere::{chordal_distance, PointBall, SpherePoint};

/// Working precision never exceeds this many bits.
pub const MAX_BITS: u64 = 1 << 13;

/// Coordinate chart on the sphere: `z` itself, or `w = 1/z` near infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Primary,
    Inverted,
}

/// A disc `|u - center| <= radius` in one chart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub center: GaussRat,
    pub radius: Dyadic,
}

impl ChartPoint {
    pub fn exact(p: &SpherePoint) -> Self {
        match p {
            SpherePoint::Finite(z) => ChartPoint { chart: Chart::Primary, center: z.clone(), radius: Dyadic::zero() },
            SpherePoint::Infinity => ChartPoint { chart: Chart::Inverted, center: GaussRat::zero(), radius: Dyadic::zero() },
        }
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    /// The center as a point of the sphere.
    pub fn point(&self) -> SpherePoint {
        let p = SpherePoint::Finite(self.center.clone());
        match self.chart {
            Chart::Primary => p,
            Chart::Inverted => p.invert(),
        }
    }

    /// Chart coordinates as a complex ball.
    pub fn disc(&self) -> ComplexBall {
        let c = &self.center;
        let mut b = c.to_ball(96);
        b = b.widen(&self.radius);
        b
    }

    /// Upper bound on the chordal radius of the disc.
    ///
    /// The chordal metric has density `2 / (1 + |u|^2)` in either chart.
    pub fn chordal_radius(&self) -> Dyadic {
        if self.radius.is_zero() {
            return Dyadic::zero();
        }
        let r = self.radius.to_rational();
        let abs_lo = sqrt_rational(&self.center.norm_sqr(), 40).expect("nonnegative").lo().to_rational();
        let m = &abs_lo - &r;
        let two_r = &r * BigRational::from_integer(2.into());
        if !m.is_positive() {
            return self.radius.shl(1);
        }
        ceil_dyadic(&(two_r / (BigRational::one() + &m * &m)))
    }

    pub fn ball(&self) -> PointBall {
        PointBall { center: self.point(), radius: self.chordal_radius() }
    }

    /// Encloses the chordal distance from every point of the disc to `s`.
    pub fn distance(&self, s: &SpherePoint, prec: i64) -> BallReal {
        chordal_distance(&self.point(), s, prec).add_error(&self.chordal_radius())
    }
}

/// Rounds a nonnegative rational up to a dyadic with about 32 significant bits.
pub(crate) fn ceil_dyadic(q: &BigRational) -> Dyadic {
    if q.is_zero() {
        return Dyadic::zero();
    }
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
    Dyadic::from_rational(q, 32 - mag, Round::Ceil)
}

/// Roots gathered into discs, each holding exactly `multiplicity` roots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCluster {
    pub point: ChartPoint,
    pub multiplicity: usize,
}

impl RootCluster {
    pub fn is_exact(&self) -> bool {
        self.point.is_exact()
    }

    pub fn center(&self) -> SpherePoint {
        self.point.point()
    }

    pub fn ball(&self) -> PointBall {
        self.point.ball()
    }
}

fn horner_f64(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Floating-point root approximations by Aberth iteration.
fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n].norm();
    let tail = c[0].norm();
    let mut radius = if tail > 0.0 && lead > 0.0 { (tail / lead).powf(1.0 / n as f64) } else { 1.0 };
    if !radius.is_finite() || radius == 0.0 {
        radius = 1.0;
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner_f64(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.iter().map(|w| if w.is_finite() { *w } else { Complex64::new(0.3, 0.7) }).collect()
}

fn exact_of(z: Complex64) -> ComplexBall {
    ComplexBall::exact(Dyadic::from_f64(z.re).unwrap_or_else(Dyadic::zero), Dyadic::from_f64(z.im).unwrap_or_else(Dyadic::zero))
}

fn horner_ball(a: &[ComplexBall], z: &ComplexBall, bits: u64) -> ComplexBall {
    let mut acc = ComplexBall::zero();
    for c in a.iter().rev() {
        acc = (&(&acc * z) + c).round_rel(bits);
    }
    acc
}

/// Lower bound on `|z|` over a rectangle.
fn mig(z: &ComplexBall) -> Dyadic {
    Dyadic::max(&z.re.mig(), &z.im.mig())
}

/// Rounds to a dyadic with `bits` significant bits.
fn round_q(q: &BigRational, bits: u64) -> Dyadic {
    if q.is_zero() {
        return Dyadic::zero();
    }
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
    Dyadic::from_rational(q, bits as i64 - mag, Round::Nearest)
}

/// Rough `log2 |z|`, `None` at zero.
fn log2_abs(z: &GaussRat) -> Option<i64> {
    let m = |q: &BigRational| (!q.is_zero()).then(|| q.numer().bits() as i64 - q.denom().bits() as i64);
    match (m(&z.re), m(&z.im)) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(i64::MIN / 2).max(b.unwrap_or(i64::MIN / 2))),
    }
}

/// Weierstrass correction at `z[i]` using midpoints only.
fn weierstrass_mid(a: &[ComplexBall], z: &[ComplexBall], i: usize, bits: u64) -> Option<GaussRat> {
    let mids: Vec<ComplexBall> = a.iter().map(|c| c.mid()).collect();
    let num = horner_ball(&mids, &z[i], bits).mid_exact();
    let mut den = mids.last().expect("nonempty").clone();
    for (j, zj) in z.iter().enumerate() {
        if j != i {
            den = (&den * &(&z[i] - zj)).round_rel(bits);
        }
    }
    let den = den.mid_exact();
    if den.is_zero() {
        return None;
    }
    let w = &num / &den;
    Some(GaussRat::new(round_q(&w.re, bits).to_rational(), round_q(&w.im, bits).to_rational()))
}

/// Certified disc radius `n |W_i|` including coefficient uncertainty.
fn inclusion_radius(a: &[ComplexBall], z: &[ComplexBall], i: usize, bits: u64) -> Option<Dyadic> {
    let n = a.len() - 1;
    let num = horner_ball(a, &z[i], bits);
    let mut den = a[n].clone();
    for (j, zj) in z.iter().enumerate() {
        if j != i {
            den = (&den * &(&z[i] - zj)).round_rel(bits);
        }
    }
    let lo = mig(&den);
    if lo.is_zero() {
        return None;
    }
    let r = num.mag().to_rational() * BigRational::from_integer(n.into()) / lo.to_rational();
    Some(ceil_dyadic(&r))
}

fn disjoint(z: &[ComplexBall], r: &[Dyadic]) -> bool {
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let d = &z[i] - &z[j];
            let dd = &(&d.re.mid * &d.re.mid) + &(&d.im.mid * &d.im.mid);
            let s = &r[i] + &r[j];
            if &s * &s >= dd {
                return false;
            }
        }
    }
    true
}

/// Isolates the roots of `sum a_k u^k`, assumed simple, in discs of radius at
/// most `target` when the coefficient uncertainty allows it.
///
/// Returns `(center, radius)` per root. With inexact coefficients the radii
/// may stay above `target`; refinement stops once they no longer shrink.
pub fn isolate(a: &[ComplexBall], target: &Dyadic) -> Result<Vec<(GaussRat, Dyadic)>> {
    let n = a.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if !a[n].excludes_zero() {
        return Err(Error::ChartFailure);
    }
    let exact_coeffs = a.iter().all(|c| c.is_exact());
    if n == 1 {
        let mut bits = 64;
        loop {
            let prec = bits as i64 - a[1].mag().magnitude() + a[0].mag().magnitude().max(0);
            let root = (-&a[0]).div(&a[1], prec)?;
            let rad = root.disc_radius();
            if rad <= *target || !exact_coeffs || bits >= MAX_BITS {
                if rad > *target && exact_coeffs {
                    return Err(Error::PrecisionExhausted { bits });
                }
                return Ok(vec![(root.mid_exact(), round_rad(&rad))]);
            }
            bits *= 2;
        }
    }
    let c64: Vec<Complex64> = a.iter().map(|c| {
        let (x, y) = c.to_f64();
        Complex64::new(x, y)
    }).collect();
    let mut z: Vec<ComplexBall> = aberth(&c64).into_iter().map(exact_of).collect();
    let mut bits: u64 = 64;
    let mut last: Option<Dyadic> = None;
    loop {
        for _ in 0..12 {
            let mut converged = true;
            let mut next = z.clone();
            for i in 0..n {
                if let Some(w) = weierstrass_mid(a, &z, i, bits) {
                    let zi = z[i].mid_exact();
                    let moved = &zi - &w;
                    next[i] = ComplexBall::exact(round_q(&moved.re, bits), round_q(&moved.im, bits));
                    let scale = log2_abs(&zi).unwrap_or(0).max(0);
                    if log2_abs(&w).is_some_and(|m| m > scale - bits as i64 + 4) {
                        converged = false;
                    }
                }
            }
            z = next;
            if converged {
                break;
            }
        }
        let radii: Option<Vec<Dyadic>> = (0..n).map(|i| inclusion_radius(a, &z, i, bits)).collect();
        if let Some(r) = radii {
            if disjoint(&z, &r) {
                let worst = r.iter().fold(Dyadic::zero(), |m, x| Dyadic::max(&m, x));
                let stalled = !exact_coeffs && last.as_ref().is_some_and(|l| worst.shl(1) > *l);
                if worst <= *target || stalled {
                    return Ok(z.iter().zip(r).map(|(c, r)| (c.mid_exact(), r)).collect());
                }
                last = Some(worst);
            }
        }
        bits *= 2;
        if bits > MAX_BITS {
            return Err(Error::PrecisionExhausted { bits: bits / 2 });
        }
    }
}

fn round_rad(r: &Dyadic) -> Dyadic {
    ceil_dyadic(&r.to_rational())
}

/// Scales a polynomial to Gaussian-integer coefficients.
pub(crate) fn integer_coeffs(p: &Poly) -> Vec<ComplexBall> {
    let den = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |d, c| d.lcm(c.re.denom()).lcm(c.im.denom()));
    let q = BigRational::from_integer(den);
    p.coeffs()
        .iter()
        .map(|c| {
            let re = (&c.re * &q).to_integer();
            let im = (&c.im * &q).to_integer();
            ComplexBall::exact(Dyadic::from_int(re), Dyadic::from_int(im))
        })
        .collect()
}

/// The rational with the smallest denominator in `[lo, hi]`.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi);
    if !lo.is_positive() && !hi.is_negative() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Tries to identify an isolated root as an exact Gaussian rational.
fn exact_root(p: &Poly, center: &GaussRat, radius: &Dyadic) -> Option<GaussRat> {
    let r = radius.to_rational();
    let re = simplest_between(&(&center.re - &r), &(&center.re + &r));
    let im = simplest_between(&(&center.im - &r), &(&center.im + &r));
    let q = GaussRat::new(re, im);
    p.eval(&q).is_zero().then_some(q)
}

/// Roots of a squarefree exact polynomial, with exact roots recognized.
fn squarefree_roots(g: &Poly, target: &Dyadic) -> Result<Vec<ChartPoint>> {
    if g.degree() == 1 {
        let root = &(-&g.coeff(0)) / &g.coeff(1);
        return Ok(vec![ChartPoint { chart: Chart::Primary, center: root, radius: Dyadic::zero() }]);
    }
    let discs = isolate(&integer_coeffs(g), target)?;
    Ok(discs
        .into_iter()
        .map(|(c, r)| match exact_root(g, &c, &r) {
            Some(q) => ChartPoint { chart: Chart::Primary, center: q, radius: Dyadic::zero() },
            None => ChartPoint { chart: Chart::Primary, center: c, radius: r },
        })
        .collect())
}

fn clusters_disjoint(cs: &[RootCluster]) -> bool {
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            let (a, b) = (&cs[i].point, &cs[j].point);
            let d = (&a.center - &b.center).norm_sqr();
            let s = (&a.radius + &b.radius).to_rational();
            if &s * &s >= d {
                return false;
            }
        }
    }
    true
}

/// Roots of an exact polynomial in disjoint discs of chordal radius at most `2^-l`.
///
/// Multiplicities come from the exact squarefree decomposition.
pub fn certified_roots(p: &Poly, l: u32) -> Result<Vec<RootCluster>> {
    if p.degree() == 0 {
        return Err(Error::Invalid("root finding needs degree at least 1".into()));
    }
    let factors = p.squarefree();
    let mut bits = l as i64 + 1;
    loop {
        let target = Dyadic::pow2(-bits);
        let mut out = Vec::new();
        for (g, k) in &factors {
            for point in squarefree_roots(g, &target)? {
                out.push(RootCluster { point, multiplicity: *k });
            }
        }
        if clusters_disjoint(&out) {
            out.sort_by(|a, b| a.point.cmp(&b.point));
            return Ok(out);
        }
        bits += 32;
        if bits as u64 > MAX_BITS {
            return Err(Error::PrecisionExhausted { bits: bits as u64 });
        }
    }
}
