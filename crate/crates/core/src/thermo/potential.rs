//! Potentials built from chordal distances to ideal points.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Hat;
use crate::numerics::{format_rational, parse_rational, BallReal};
use crate::ratmap::ChartPoint;
use crate::sphere::SpherePoint;

/// Expression tree for a potential on the sphere.
///
/// `Basis(s)` is `x -> sigma(x, s)`. Hats are allowed as leaves for
/// verification witnesses; they leave the polynomial algebra but keep explicit
/// Lipschitz constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Potential {
    Const {
        #[serde(with = "crate::numerics::rational_text")]
        value: BigRational,
    },
    Basis {
        point: SpherePoint,
    },
    Hat {
        hat: Hat<SpherePoint>,
    },
    Sum {
        terms: Vec<Potential>,
    },
    Prod {
        factors: Vec<Potential>,
    },
    Scale {
        #[serde(with = "crate::numerics::rational_text")]
        by: BigRational,
        arg: Box<Potential>,
    },
}

impl Potential {
    pub fn constant(q: BigRational) -> Self {
        Potential::Const { value: q }
    }

    pub fn zero() -> Self {
        Self::constant(BigRational::zero())
    }

    pub fn basis(s: SpherePoint) -> Self {
        Potential::Basis { point: s }
    }

    pub fn hat(h: Hat<SpherePoint>) -> Self {
        Potential::Hat { hat: h }
    }

    pub fn sum(terms: Vec<Potential>) -> Self {
        Potential::Sum { terms }
    }

    pub fn prod(factors: Vec<Potential>) -> Self {
        Potential::Prod { factors }
    }

    pub fn scale(by: BigRational, arg: Potential) -> Self {
        Potential::Scale { by, arg: Box::new(arg) }
    }

    /// The constant value, if the tree is a constant leaf.
    pub fn as_constant(&self) -> Option<&BigRational> {
        match self {
            Potential::Const { value } => Some(value),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant().is_some_and(|q| q.is_zero())
    }

    /// Encloses the value at every point of the disc.
    pub fn eval(&self, x: &ChartPoint, prec: i64) -> BallReal {
        match self {
            Potential::Const { value } => BallReal::from_rational(value, prec),
            Potential::Basis { point } => x.distance(point, prec),
            Potential::Hat { hat } => hat.eval_distance(&x.distance(&hat.center, prec + 4), prec),
            Potential::Sum { terms } => {
                terms.iter().fold(BallReal::zero(), |acc, t| (&acc + &t.eval(x, prec + 4)).round(prec + 4))
            }
            Potential::Prod { factors } => {
                factors.iter().fold(BallReal::one(), |acc, t| (&acc * &t.eval(x, prec + 8)).round(prec + 8))
            }
            Potential::Scale { by, arg } => {
                let extra = by.abs().numer().bits() as i64 + 4;
                arg.eval(x, prec + extra).mul_rational(by, prec + extra).round(prec + 4)
            }
        }
    }

    pub fn eval_point(&self, x: &SpherePoint, prec: i64) -> BallReal {
        self.eval(&ChartPoint::exact(x), prec)
    }

    /// `(sup |phi|, Lip phi)` bounds by structural recursion.
    fn sup_lip(&self) -> (BigRational, BigRational) {
        let two = BigRational::from_integer(2.into());
        match self {
            Potential::Const { value } => (value.abs(), BigRational::zero()),
            Potential::Basis { .. } => (two, BigRational::one()),
            Potential::Hat { hat } => (BigRational::one(), hat.lipschitz()),
            Potential::Sum { terms } => terms.iter().map(|t| t.sup_lip()).fold(
                (BigRational::zero(), BigRational::zero()),
                |(s, l), (a, b)| (s + a, l + b),
            ),
            Potential::Prod { factors } => factors.iter().map(|t| t.sup_lip()).fold(
                (BigRational::one(), BigRational::zero()),
                |(s, l), (a, b)| (&s * &a, &s * &b + &a * &l),
            ),
            Potential::Scale { by, arg } => {
                let (s, l) = arg.sup_lip();
                (by.abs() * s, by.abs() * l)
            }
        }
    }

    /// Expands into `sum_t q_t prod f_{i}`; `None` if the tree contains a hat.
    pub fn normal_form(&self) -> Option<Vec<(BigRational, Vec<SpherePoint>)>> {
        let mut map: BTreeMap<Vec<SpherePoint>, BigRational> = BTreeMap::new();
        for (q, mono) in self.expand()? {
            *map.entry(mono).or_insert_with(BigRational::zero) += q;
        }
        Some(map.into_iter().filter(|(_, q)| !q.is_zero()).map(|(m, q)| (q, m)).collect())
    }

    fn expand(&self) -> Option<Vec<(BigRational, Vec<SpherePoint>)>> {
        Some(match self {
            Potential::Const { value } => vec![(value.clone(), Vec::new())],
            Potential::Basis { point } => vec![(BigRational::one(), vec![point.clone()])],
            Potential::Hat { .. } => return None,
            Potential::Sum { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    out.extend(t.expand()?);
                }
                out
            }
            Potential::Prod { factors } => {
                let mut acc = vec![(BigRational::one(), Vec::new())];
                for f in factors {
                    let e = f.expand()?;
                    let mut next = Vec::with_capacity(acc.len() * e.len());
                    for (qa, ma) in &acc {
                        for (qb, mb) in &e {
                            let mut m = ma.clone();
                            m.extend(mb.iter().cloned());
                            m.sort();
                            next.push((qa * qb, m));
                        }
                    }
                    acc = next;
                }
                acc
            }
            Potential::Scale { by, arg } => arg.expand()?.into_iter().map(|(q, m)| (by * q, m)).collect(),
        })
    }

    /// A Lipschitz bound with respect to the chordal metric.
    ///
    /// On hat-free trees this is `sum_t 2^(m_t - 1) m_t |q_t|` over the
    /// expanded monomials `q_t f_1 ... f_{m_t}`: each factor is 1-Lipschitz
    /// and at most 2, the chordal diameter.
    pub fn holder_bound(&self) -> BigRational {
        match self.normal_form() {
            Some(terms) => terms
                .iter()
                .filter(|(_, m)| !m.is_empty())
                .map(|(q, m)| {
                    let k = m.len();
                    let pow = BigRational::from_integer(num_bigint::BigInt::from(1) << (k - 1));
                    pow * BigRational::from_integer(k.into()) * q.abs()
                })
                .fold(BigRational::zero(), |a, b| a + b),
            None => self.sup_lip().1,
        }
    }

    /// Upper bound on `sup |phi|`.
    pub fn sup_bound(&self) -> BigRational {
        self.sup_lip().0
    }

    pub fn plus_constant(&self, c: &BigRational) -> Potential {
        Potential::sum(vec![self.clone(), Potential::constant(c.clone())])
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Const { value } => write!(f, "{}", format_rational(value)),
            Potential::Basis { point } => write!(f, "sigma(., {point})"),
            Potential::Hat { hat } => write!(
                f,
                "hat({}, {}, {})",
                hat.center,
                format_rational(&hat.r),
                format_rational(&hat.eps)
            ),
            Potential::Sum { terms } => {
                let parts: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            Potential::Prod { factors } => {
                let parts: Vec<String> = factors.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join(" * "))
            }
            Potential::Scale { by, arg } => write!(f, "{}*{}", format_rational(by), arg),
        }
    }
}

impl std::str::FromStr for Potential {
    type Err = Error;

    /// Short forms `const:q`, `basis:z`, `hat:z,r,eps`, or a JSON tree.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(format!("potential: {e}")));
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("potential `{s}`: expected const:, basis:, hat: or JSON")))?;
        match kind {
            "const" => Ok(Potential::constant(parse_rational(arg)?)),
            "basis" => Ok(Potential::basis(arg.parse()?)),
            "hat" => {
                let parts: Vec<&str> = arg.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse("hat: expected center,r,eps".into()));
                }
                let eps = parse_rational(parts[2])?;
                if !eps.is_positive() {
                    return Err(Error::Parse("hat: eps must be positive".into()));
                }
                Ok(Potential::hat(Hat::new(parts[0].parse()?, parse_rational(parts[1])?, eps)))
            }
            _ => Err(Error::Parse(format!("potential: unknown form `{kind}`"))),
        }
    }
}
