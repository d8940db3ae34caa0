//! Finitely supported probability measures, test functions and transport.

mod simplex;
mod transport;

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{format_rational, parse_rational, BallReal, Dyadic, Round};
use crate::sphere::{chordal_distance, SpherePoint};

pub use transport::{pinned_cost, wasserstein, wasserstein_pinned, TransportResult, COST_ERROR_LOG2, COST_SCALE_LOG2};

/// The two compact spaces a measure may live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    RiemannSphere,
    TriSphere,
}

/// A point of a compact metric space the library can measure.
pub trait MetricPoint: Clone + Ord + Debug + Serialize + DeserializeOwned {
    const SPACE: Space;
    /// Cheap coordinates used for floating-point transport costs.
    type Embed: Copy;

    /// Certified distance with radius at most `2^-prec`.
    fn distance(&self, other: &Self, prec: i64) -> BallReal;
    fn embed(&self) -> Self::Embed;
    /// Distance in floating point, within `2^-45` of the true distance.
    fn embedded_distance(a: &Self::Embed, b: &Self::Embed) -> f64;
    fn csv_header() -> &'static [&'static str];
    fn csv_fields(&self) -> Vec<String>;
}

impl MetricPoint for SpherePoint {
    const SPACE: Space = Space::RiemannSphere;
    type Embed = [f64; 3];

    fn distance(&self, other: &Self, prec: i64) -> BallReal {
        chordal_distance(self, other, prec)
    }

    fn embed(&self) -> [f64; 3] {
        self.to_xyz()
    }

    fn embedded_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
        (x * x + y * y + z * z).sqrt()
    }

    fn csv_header() -> &'static [&'static str] {
        &["point", "re", "im"]
    }

    fn csv_fields(&self) -> Vec<String> {
        match self {
            SpherePoint::Infinity => vec!["inf".into(), String::new(), String::new()],
            SpherePoint::Finite(z) => {
                let (x, y) = z.to_f64();
                vec![z.to_string(), format!("{x:e}"), format!("{y:e}")]
            }
        }
    }
}

/// Atoms with positive rational weights, sorted and distinct.
///
/// `displacement` bounds how far each atom may sit from the point it stands
/// for; it is zero for measures whose atoms are exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMeasure<P> {
    atoms: Vec<(P, BigRational)>,
    displacement: Dyadic,
}

impl<P: MetricPoint> FiniteMeasure<P> {
    /// A probability measure; weights must be positive and sum to exactly one.
    pub fn new(atoms: Vec<(P, BigRational)>) -> Result<Self> {
        let m = Self::sub(atoms)?;
        if !m.total_mass().is_one() {
            return Err(Error::NotProbability);
        }
        Ok(m)
    }

    /// A measure of total mass at most one.
    pub fn sub(mut atoms: Vec<(P, BigRational)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| !w.is_positive()) {
            return Err(Error::NotProbability);
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateAtom);
        }
        let m = FiniteMeasure { atoms, displacement: Dyadic::zero() };
        if m.total_mass() > BigRational::one() {
            return Err(Error::NotProbability);
        }
        Ok(m)
    }

    /// Sums the weights of repeated points, then builds a probability measure.
    pub fn merged(atoms: impl IntoIterator<Item = (P, BigRational)>) -> Result<Self> {
        let mut map: BTreeMap<P, BigRational> = BTreeMap::new();
        for (p, w) in atoms {
            *map.entry(p).or_insert_with(BigRational::zero) += w;
        }
        Self::new(map.into_iter().collect())
    }

    pub fn dirac(p: P) -> Self {
        FiniteMeasure { atoms: vec![(p, BigRational::one())], displacement: Dyadic::zero() }
    }

    /// Uniform measure on distinct points.
    pub fn uniform(points: Vec<P>) -> Result<Self> {
        let w = BigRational::new(1.into(), points.len().into());
        Self::new(points.into_iter().map(|p| (p, w.clone())).collect())
    }

    pub fn with_displacement(mut self, d: Dyadic) -> Self {
        self.displacement = d;
        self
    }

    pub fn displacement(&self) -> &Dyadic {
        &self.displacement
    }

    pub fn atoms(&self) -> &[(P, BigRational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn space(&self) -> Space {
        P::SPACE
    }

    pub fn total_mass(&self) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |s, (_, w)| s + w)
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass().is_one()
    }

    pub fn weight_of(&self, p: &P) -> BigRational {
        match self.atoms.binary_search_by(|a| a.0.cmp(p)) {
            Ok(k) => self.atoms[k].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let atoms: Vec<serde_json::Value> = self
            .atoms
            .iter()
            .map(|(p, w)| serde_json::json!({"point": p, "weight": format_rational(w)}))
            .collect();
        serde_json::json!({
            "space": P::SPACE,
            "displacement": self.displacement.to_string(),
            "atoms": atoms,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("measure: {m}"));
        let space: Space = serde_json::from_value(v.get("space").cloned().ok_or_else(|| bad("missing space"))?)
            .map_err(|e| bad(&e.to_string()))?;
        if space != P::SPACE {
            return Err(Error::SpaceMismatch);
        }
        let arr = v.get("atoms").and_then(|a| a.as_array()).ok_or_else(|| bad("missing atoms"))?;
        let mut atoms = Vec::with_capacity(arr.len());
        for a in arr {
            let p: P = serde_json::from_value(a.get("point").cloned().ok_or_else(|| bad("atom without point"))?)
                .map_err(|e| bad(&e.to_string()))?;
            let w = parse_rational(a.get("weight").and_then(|w| w.as_str()).ok_or_else(|| bad("atom without weight"))?)?;
            atoms.push((p, w));
        }
        let mut m = Self::sub(atoms)?;
        if let Some(d) = v.get("displacement").and_then(|d| d.as_str()) {
            m.displacement = d.parse()?;
        }
        Ok(m)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = P::csv_header().to_vec();
        header.push("weight");
        w.write_record(&header).expect("in-memory write");
        for (p, wt) in &self.atoms {
            let mut row = p.csv_fields();
            row.push(format_rational(wt));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// `tau(x) = max(0, 1 - max(0, d(x, center) - r) / eps)`; Lipschitz with constant `1/eps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hat<P> {
    pub center: P,
    #[serde(with = "crate::numerics::rational_text")]
    pub r: BigRational,
    #[serde(with = "crate::numerics::rational_text")]
    pub eps: BigRational,
}

impl<P: MetricPoint> Hat<P> {
    pub fn new(center: P, r: BigRational, eps: BigRational) -> Self {
        assert!(eps.is_positive(), "hat width must be positive");
        Hat { center, r, eps }
    }

    pub fn lipschitz(&self) -> BigRational {
        self.eps.recip()
    }

    fn profile(&self, d: &BigRational) -> BigRational {
        let over = d - &self.r;
        if !over.is_positive() {
            return BigRational::one();
        }
        let v = BigRational::one() - over / &self.eps;
        if v.is_negative() {
            BigRational::zero()
        } else {
            v
        }
    }

    /// Value given an enclosure of the distance to the center.
    pub fn eval_distance(&self, d: &BallReal, prec: i64) -> BallReal {
        // the profile is nonincreasing in d
        let lo = Dyadic::from_rational(&self.profile(&d.hi().to_rational()), prec, Round::Floor);
        let hi = Dyadic::from_rational(&self.profile(&d.lo().to_rational()), prec, Round::Ceil);
        BallReal::from_interval(&lo, &hi)
    }

    pub fn eval(&self, x: &P, prec: i64) -> BallReal {
        self.eval_distance(&x.distance(&self.center, prec + 4), prec)
    }
}

/// `sum_i w_i f(x_i)`.
pub fn integrate<P: MetricPoint>(mu: &FiniteMeasure<P>, mut f: impl FnMut(&P) -> BallReal, prec: i64) -> BallReal {
    let mut acc = BallReal::zero();
    for (p, w) in mu.atoms() {
        acc = &acc + &f(p).mul_rational(w, prec + 8);
    }
    acc
}

/// Integral of a hat, widened by the measure's displacement times the hat's Lipschitz constant.
pub fn integrate_hat<P: MetricPoint>(mu: &FiniteMeasure<P>, h: &Hat<P>, prec: i64) -> BallReal {
    let v = integrate(mu, |p| h.eval(p, prec + 8), prec);
    let slack = BallReal::exact(mu.displacement().clone()).mul_rational(&h.lipschitz(), prec + 8);
    v.add_error(&slack.hi())
}

/// `T_* mu` for a map with exact images; atoms with equal images merge.
pub fn pushforward<P: MetricPoint, Q: MetricPoint>(
    mu: &FiniteMeasure<P>,
    mut t: impl FnMut(&P) -> Option<Q>,
) -> Result<FiniteMeasure<Q>> {
    let mut out = Vec::with_capacity(mu.len());
    for (p, w) in mu.atoms() {
        out.push((t(p).ok_or(Error::InexactImage)?, w.clone()));
    }
    let mass = mu.total_mass();
    let mut map: BTreeMap<Q, BigRational> = BTreeMap::new();
    for (p, w) in out {
        *map.entry(p).or_insert_with(BigRational::zero) += w;
    }
    let m = FiniteMeasure::sub(map.into_iter().collect())?;
    debug_assert_eq!(m.total_mass(), mass);
    Ok(m)
}

/// Outcome of testing `<mu, tau> >= <nu, tau> - tol` over a family of hats.
#[derive(Clone, Debug)]
pub enum Comparison<P> {
    Holds,
    /// The first hat whose integrals certainly break the inequality.
    Violated { index: usize, witness: Hat<P>, mu_integral: BallReal, nu_integral: BallReal },
}

impl<P> Comparison<P> {
    pub fn holds(&self) -> bool {
        matches!(self, Comparison::Holds)
    }
}

/// Reports a violation only when the enclosures prove `<mu, tau> < <nu, tau> - tol`.
pub fn compare_ge<P: MetricPoint>(
    mu: &FiniteMeasure<P>,
    nu: &FiniteMeasure<P>,
    family: &[Hat<P>],
    tol: &BigRational,
    prec: i64,
) -> Comparison<P> {
    for (index, h) in family.iter().enumerate() {
        let a = integrate_hat(mu, h, prec);
        let b = integrate_hat(nu, h, prec);
        if a.hi().to_rational() < b.lo().to_rational() - tol {
            return Comparison::Violated { index, witness: h.clone(), mu_integral: a, nu_integral: b };
        }
    }
    Comparison::Holds
}

/// A measure on either space, for callers that learn the space at run time.
#[derive(Clone, Debug)]
pub enum AnyMeasure {
    Sphere(FiniteMeasure<SpherePoint>),
    Tri(FiniteMeasure<crate::thurston::TilePoint>),
}

impl AnyMeasure {
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v.get("space").and_then(|s| s.as_str()) {
            Some("riemann_sphere") => Ok(AnyMeasure::Sphere(FiniteMeasure::from_json(v)?)),
            Some("tri_sphere") => Ok(AnyMeasure::Tri(FiniteMeasure::from_json(v)?)),
            _ => Err(Error::Parse("measure: unknown space".into())),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            AnyMeasure::Sphere(m) => m.to_json(),
            AnyMeasure::Tri(m) => m.to_json(),
        }
    }
}

/// Transport distance between measures whose space is known only at run time.
pub fn wasserstein_any(mu: &AnyMeasure, nu: &AnyMeasure, prec: i64) -> Result<TransportResult> {
    match (mu, nu) {
        (AnyMeasure::Sphere(a), AnyMeasure::Sphere(b)) => wasserstein(a, b, prec),
        (AnyMeasure::Tri(a), AnyMeasure::Tri(b)) => wasserstein(a, b, prec),
        _ => Err(Error::SpaceMismatch),
    }
}
