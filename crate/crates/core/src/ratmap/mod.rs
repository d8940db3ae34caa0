//! Rational maps of the Riemann sphere given as coprime polynomial pairs.

mod parse;
mod poly;
mod roots;

use std::fmt;

use serde_json::json;

use crate::error::{Error, Result};
use crate::numerics::{ComplexBall, Dyadic, GaussRat};
use crate::sphere::SpherePoint;

pub use parse::{parse_map, parse_poly};
pub use poly::Poly;
pub use roots::{certified_roots, isolate, simplest_between, Chart, ChartPoint, RootCluster, MAX_BITS};

/// `f = num / den` with `gcd(num, den) = 1` and degree `max(deg num, deg den) >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
    degree: usize,
    int_num: Vec<ComplexBall>,
    int_den: Vec<ComplexBall>,
}

/// Forward orbit of one critical point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalOrbit {
    pub critical: SpherePoint,
    pub local_degree: usize,
    /// Steps before the orbit enters its cycle.
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Postcritical {
    Finite { post: Vec<SpherePoint>, orbits: Vec<CriticalOrbit> },
    Undecided,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Invalid("denominator is zero".into()));
        }
        if Poly::gcd(&num, &den).degree() > 0 {
            return Err(Error::NotCoprime);
        }
        let degree = num.degree().max(den.degree());
        if degree < 2 {
            return Err(Error::DegreeTooLow(degree));
        }
        // a common scale makes both polynomials Gaussian-integral
        let joint = roots::integer_coeffs(&Poly::new(num.coeffs().iter().chain(den.coeffs()).cloned().collect()));
        let (int_num, int_den) = joint.split_at(num.coeffs().len());
        let (int_num, int_den) = (int_num.to_vec(), int_den.to_vec());
        Ok(RationalMap { num, den, degree, int_num, int_den })
    }

    pub fn polynomial(p: Poly) -> Result<Self> {
        Self::new(p, Poly::one())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// Exact image of a point.
    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                let (dn, dd) = (self.num.degree(), self.den.degree());
                if dn > dd {
                    SpherePoint::Infinity
                } else if dn < dd {
                    SpherePoint::Finite(GaussRat::zero())
                } else {
                    SpherePoint::Finite(&self.num.lc() / &self.den.lc())
                }
            }
            SpherePoint::Finite(z) => {
                let d = self.den.eval(z);
                if d.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(&self.num.eval(z) / &d)
                }
            }
        }
    }

    /// `f^i(p)` for `i = 0..=n`.
    pub fn orbit(&self, p: &SpherePoint, n: usize) -> Vec<SpherePoint> {
        let mut out = Vec::with_capacity(n + 1);
        let mut x = p.clone();
        out.push(x.clone());
        for _ in 0..n {
            x = self.apply(&x);
            out.push(x.clone());
        }
        out
    }

    /// The distinct points `f^i(inf)`, `1 <= i <= m`.
    pub fn orbit_of_infinity(&self, m: usize) -> Vec<SpherePoint> {
        let mut out: Vec<SpherePoint> = Vec::new();
        let mut x = SpherePoint::Infinity;
        for _ in 0..m {
            x = self.apply(&x);
            if out.contains(&x) {
                break;
            }
            out.push(x.clone());
        }
        out
    }

    /// The polynomial whose roots are the finite preimages of `x`, and the multiplicity of infinity.
    fn fiber_poly(&self, x: &SpherePoint) -> (Poly, usize) {
        let g = match x {
            SpherePoint::Infinity => self.den.clone(),
            SpherePoint::Finite(c) => &self.num - &self.den.scale(c),
        };
        let at_inf = self.degree - g.degree();
        (g, at_inf)
    }

    /// Preimages of an exact point with their local degrees, in discs of chordal radius at most `2^-l`.
    pub fn preimages(&self, x: &SpherePoint, l: u32) -> Result<Vec<RootCluster>> {
        let (g, at_inf) = self.fiber_poly(x);
        let mut out = if g.degree() > 0 { certified_roots(&g, l)? } else { Vec::new() };
        if at_inf > 0 {
            out.push(RootCluster { point: ChartPoint::exact(&SpherePoint::Infinity), multiplicity: at_inf });
        }
        Ok(out)
    }

    /// Preimages of every point of a disc, one simple root per returned disc.
    ///
    /// Exact inputs are routed to [`RationalMap::preimages`]. Otherwise the
    /// fiber polynomial is solved in whichever chart has the larger leading
    /// coefficient, so roots near infinity are found as roots near zero of
    /// the reversed polynomial.
    pub fn preimages_of_disc(&self, x: &ChartPoint, l: u32) -> Result<Vec<RootCluster>> {
        if x.is_exact() {
            return self.preimages(&x.point(), l);
        }
        let xb = x.disc();
        let d = self.degree;
        let coeff = |v: &[ComplexBall], k: usize| v.get(k).cloned().unwrap_or_else(ComplexBall::zero);
        let g: Vec<ComplexBall> = (0..=d)
            .map(|k| match x.chart {
                Chart::Primary => &coeff(&self.int_num, k) - &(&xb * &coeff(&self.int_den, k)),
                Chart::Inverted => &(&xb * &coeff(&self.int_num, k)) - &coeff(&self.int_den, k),
            })
            .collect();
        let target = Dyadic::pow2(-(l as i64) - 1);
        let lead = g[d].mag().to_rational() - g[d].disc_radius().shl(1).to_rational();
        let tail = g[0].mag().to_rational() - g[0].disc_radius().shl(1).to_rational();
        let (chart, coeffs) = if lead >= tail {
            (Chart::Primary, g)
        } else {
            (Chart::Inverted, g.into_iter().rev().collect())
        };
        let discs = isolate(&coeffs, &target)?;
        let mut out: Vec<RootCluster> = discs
            .into_iter()
            .map(|(center, radius)| RootCluster { point: ChartPoint { chart, center, radius }, multiplicity: 1 })
            .collect();
        out.sort_by(|a, b| a.point.cmp(&b.point));
        Ok(out)
    }

    /// `num' den - num den'`, whose roots are the finite critical points.
    pub fn wronskian(&self) -> Poly {
        &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative())
    }

    /// Critical points; `multiplicity` is the local degree minus one.
    pub fn critical_points(&self, l: u32) -> Result<Vec<RootCluster>> {
        let w = self.wronskian();
        let mut out = if w.degree() > 0 { certified_roots(&w, l)? } else { Vec::new() };
        let at_inf = 2 * self.degree - 2 - w.degree();
        if at_inf > 0 {
            out.push(RootCluster { point: ChartPoint::exact(&SpherePoint::Infinity), multiplicity: at_inf });
        }
        Ok(out)
    }

    /// Exact postcritical set, after at most `maxlen` iterations per critical point.
    pub fn postcritical_orbit(&self, maxlen: usize) -> Result<Postcritical> {
        let crit = self.critical_points(64)?;
        if crit.iter().any(|c| !c.is_exact()) {
            return Ok(Postcritical::Undecided);
        }
        let mut post: Vec<SpherePoint> = Vec::new();
        let mut orbits = Vec::new();
        for c in &crit {
            let mut seq = vec![c.center()];
            loop {
                if seq.len() > maxlen + 1 {
                    return Ok(Postcritical::Undecided);
                }
                let next = self.apply(seq.last().expect("nonempty"));
                if let Some(i) = seq.iter().position(|p| *p == next) {
                    orbits.push(CriticalOrbit {
                        critical: c.center(),
                        local_degree: c.multiplicity + 1,
                        preperiod: i,
                        period: seq.len() - i,
                    });
                    // the orbit after time 0, which includes the critical point only if it is periodic
                    let mut tail: Vec<SpherePoint> = seq[1..].to_vec();
                    if i == 0 {
                        tail.push(seq[0].clone());
                    }
                    post.extend(tail);
                    break;
                }
                seq.push(next);
            }
        }
        post.sort();
        post.dedup();
        Ok(Postcritical::Finite { post, orbits })
    }

    /// Points with finite grand orbit: critical points of full local degree
    /// whose image is again one, in a cycle of length one or two.
    pub fn exceptional_set(&self) -> Result<Vec<SpherePoint>> {
        let full: Vec<SpherePoint> = self
            .critical_points(64)?
            .into_iter()
            .filter(|c| c.is_exact() && c.multiplicity + 1 == self.degree)
            .map(|c| c.center())
            .collect();
        let mut out: Vec<SpherePoint> = full
            .iter()
            .filter(|c| {
                let v = self.apply(c);
                full.contains(&v) && self.apply(&v) == **c
            })
            .cloned()
            .collect();
        out.sort();
        Ok(out)
    }

    /// Postcritically finite with no periodic critical point.
    pub fn is_misiurewicz(&self, maxlen: usize) -> Result<Option<bool>> {
        Ok(match self.postcritical_orbit(maxlen)? {
            Postcritical::Finite { orbits, .. } => Some(orbits.iter().all(|o| o.preperiod > 0)),
            Postcritical::Undecided => None,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let c = |p: &Poly| p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>();
        json!({"num": c(&self.num), "den": c(&self.den)})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let read = |key: &str| -> Result<Poly> {
            let arr = v
                .get(key)
                .and_then(|a| a.as_array())
                .ok_or_else(|| Error::Parse(format!("map: missing `{key}`")))?;
            let cs = arr
                .iter()
                .map(|c| c.as_str().ok_or_else(|| Error::Parse("map: coefficients are strings".into()))?.parse())
                .collect::<Result<Vec<GaussRat>>>()?;
            Ok(Poly::new(cs))
        };
        Self::new(read("num")?, read("den")?)
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() && self.den.lc() == GaussRat::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl std::str::FromStr for RationalMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_map(s)
    }
}
