//! Checks that a candidate measure is an equilibrium state.
//!
//! Every check returns a signed residual together with the slack its test
//! family allows. A check rejects only when the enclosure of the residual
//! lies above `slack + tol`.

mod patches;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::measure::{integrate, pushforward, wasserstein, FiniteMeasure, Hat, MetricPoint, TransportResult};
use crate::numerics::{format_rational, BallReal, DirectedReal, Direction, Dyadic, Round};
use crate::thermo::Potential;

pub use patches::{Membership, PatchSystem, SpherePatch, SpherePatches, TilePatches};

/// Default tolerance of every check.
pub fn default_tol() -> BigRational {
    BigRational::new(1.into(), 1024.into())
}

/// A prescribed Jacobian: a constant, or `exp(P - phi(x) + h(T x) - h(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JacobianSpec {
    Const {
        #[serde(with = "crate::numerics::rational_text")]
        value: BigRational,
    },
    Potential {
        pressure: BallReal,
        phi: Potential,
        h: Potential,
    },
}

impl JacobianSpec {
    pub fn constant(q: BigRational) -> Self {
        JacobianSpec::Const { value: q }
    }

    /// Upper bound on `J` over the whole space.
    pub fn sup_bound(&self) -> BigRational {
        match self {
            JacobianSpec::Const { value } => value.clone(),
            JacobianSpec::Potential { pressure, phi, h } => {
                let e = pressure.hi().to_rational() + phi.sup_bound() + h.sup_bound() * BigRational::from_integer(2.into());
                let x = BallReal::from_rational(&e, 40).exp(40).expect("exp is total");
                x.hi().to_rational()
            }
        }
    }

    /// `J` from the values `phi(y)`, `h(y)` at a point and `h(T y)` at its image.
    fn combine(&self, phi_y: &BallReal, h_y: &BallReal, h_ty: &BallReal, prec: i64) -> Result<BallReal> {
        match self {
            JacobianSpec::Const { value } => Ok(BallReal::from_rational(value, prec)),
            JacobianSpec::Potential { pressure, .. } => {
                let e = &(&(pressure - phi_y) + h_ty) - h_y;
                e.exp(prec)
            }
        }
    }
}

/// `|sum_{y in f^-1(x)} 1/J(y) - 1|`.
pub fn jacobian_unitarity(sys: &SpherePatches, j: &JacobianSpec, x: &crate::sphere::SpherePoint, prec: i64) -> Result<BallReal> {
    let pre = sys.preimages(x)?;
    if pre.iter().any(|y| !sys.off_excluded(y)) {
        return Err(Error::ExcludedPoint);
    }
    let p = prec + 8;
    let mut acc = BallReal::zero();
    for y in &pre {
        let jy = sys.jacobian_at_preimage(j, y, x, p)?;
        if !jy.is_positive() {
            return Err(Error::NonPositiveJacobian);
        }
        acc = &acc + &jy.recip(p)?;
    }
    Ok((&acc - &BallReal::one()).abs())
}

/// `J(a) = mu({T a}) / mu({a})` on the atoms of `mu`.
pub fn atomic_jacobian<P: MetricPoint>(
    mu: &FiniteMeasure<P>,
    mut image: impl FnMut(&P) -> Option<P>,
) -> Result<BTreeMap<P, BigRational>> {
    let mut seen: BTreeMap<P, P> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (a, w) in mu.atoms() {
        let t = image(a).ok_or(Error::InexactImage)?;
        if seen.insert(t.clone(), a.clone()).is_some() {
            return Err(Error::NotInjectiveOnSupport);
        }
        out.insert(a.clone(), mu.weight_of(&t) / w);
    }
    Ok(out)
}

/// `integral log J dmu`, a lower bound for the entropy when `J` is a Jacobian of `mu`.
pub fn rokhlin_lower_bound<P: MetricPoint>(
    mu: &FiniteMeasure<P>,
    mut j: impl FnMut(&P) -> Result<BallReal>,
    prec: i64,
) -> Result<BallReal> {
    let p = prec + 8;
    let mut logs = Vec::with_capacity(mu.len());
    for (a, _) in mu.atoms() {
        let v = j(a)?;
        if !v.is_positive() {
            return Err(Error::NonPositiveJacobian);
        }
        logs.push(v.log(p)?);
    }
    let mut it = logs.into_iter();
    Ok(integrate(mu, |_| it.next().expect("one value per atom"), prec))
}

/// Residual of one (patch, test) pair.
#[derive(Clone, Debug)]
pub struct ResidualRow {
    pub patch: usize,
    pub test: usize,
    pub value: BallReal,
    pub slack: BigRational,
}

impl ResidualRow {
    /// The enclosure proves the residual exceeds `slack + tol`.
    pub fn rejects(&self, tol: &BigRational) -> bool {
        self.value.lo().to_rational() > &self.slack + tol
    }
}

#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub rows: Vec<ResidualRow>,
    pub tol: BigRational,
    pub mesh: BigRational,
}

impl MembershipReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| !r.rejects(&self.tol))
    }

    /// The row with the largest lower bound on the residual.
    pub fn worst(&self) -> Option<&ResidualRow> {
        self.rows.iter().max_by(|a, b| a.value.lo().cmp(&b.value.lo()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "patch": r.patch,
                    "test": r.test,
                    "value": r.value.mid.to_f64(),
                    "radius": r.value.rad.to_f64(),
                    "slack": r.slack.to_f64(),
                })
            })
            .collect();
        json!({
            "check": "membership",
            "residuals": rows,
            "verdict": if self.passes() { "pass" } else { "fail" },
            "tolerances": {"tol": format_rational(&self.tol), "mesh": format_rational(&self.mesh)},
        })
    }
}

/// Hats of the given widths, centered at each point, with zero plateau.
pub fn hat_family<P: MetricPoint>(centers: &[P], widths: &[BigRational]) -> Vec<Hat<P>> {
    let mut out = Vec::new();
    for c in centers {
        for w in widths {
            out.push(Hat::new(c.clone(), BigRational::zero(), w.clone()));
        }
    }
    out
}

/// Largest distance from an atom to its nearest neighbour, rounded up; zero for a single atom.
pub fn atom_mesh<P: MetricPoint>(mu: &FiniteMeasure<P>) -> BigRational {
    let e: Vec<P::Embed> = mu.atoms().iter().map(|(p, _)| p.embed()).collect();
    let mut worst = 0.0f64;
    for (i, a) in e.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (k, b) in e.iter().enumerate() {
            if k != i {
                best = best.min(P::embedded_distance(a, b));
            }
        }
        if best.is_finite() {
            worst = worst.max(best);
        }
    }
    // the embedded distance is accurate to 2^-45
    let d = Dyadic::from_f64(worst).expect("finite").to_rational() + Dyadic::pow2(-40).to_rational();
    if e.len() < 2 {
        BigRational::zero()
    } else {
        d
    }
}

/// `<mu, J tau 1_{Y_k}> - <mu, sup_{y in T^-1 x, y in Y_k} tau(y)>` for each patch and test.
///
/// Preimages whose patch membership cannot be decided count toward the
/// supremum, which can only lower the residual. The slack of a test is
/// `sup J * Lip(tau) * (mesh + displacement)`.
pub fn membership_residual<S: PatchSystem>(
    mu: &FiniteMeasure<S::Point>,
    sys: &S,
    j: &JacobianSpec,
    tests: &[Hat<S::Point>],
    mesh: &BigRational,
    tol: &BigRational,
    prec: i64,
) -> Result<MembershipReport> {
    let p = prec + 8;
    let k_count = sys.patch_count();
    let mut atom_patch: Vec<Option<usize>> = Vec::with_capacity(mu.len());
    let mut jac: Vec<BallReal> = Vec::with_capacity(mu.len());
    let mut pre: Vec<Vec<(S::Pre, Vec<Membership>)>> = Vec::with_capacity(mu.len());
    for (x, _) in mu.atoms() {
        atom_patch.push((0..k_count).find(|&k| sys.contains(k, x)));
        jac.push(sys.jacobian_at_point(j, x, p)?);
        let ys = sys.preimages(x)?;
        let mut row = Vec::with_capacity(ys.len());
        for y in ys {
            let m: Vec<Membership> = (0..k_count).map(|k| sys.pre_membership(k, &y)).collect();
            row.push((y, m));
        }
        for k in 0..k_count {
            if row.iter().filter(|(_, m)| m[k] == Membership::In).count() > 1 {
                return Err(Error::NotInjectiveOnPatch(k));
            }
        }
        pre.push(row);
    }
    let j_sup = j.sup_bound();
    let spread = mesh + mu.displacement().to_rational();
    let mut rows = Vec::new();
    for (t, tau) in tests.iter().enumerate() {
        let slack = &j_sup * tau.lipschitz() * &spread;
        let at_atoms: Vec<BallReal> = mu.atoms().iter().map(|(x, _)| tau.eval(x, p)).collect();
        let at_pre: Vec<Vec<BallReal>> = pre.iter().map(|row| row.iter().map(|(y, _)| sys.hat_at(tau, y, p)).collect()).collect();
        for k in 0..k_count {
            let mut acc = BallReal::zero();
            for (i, (_, w)) in mu.atoms().iter().enumerate() {
                let mut term = BallReal::zero();
                if atom_patch[i] == Some(k) {
                    term = &jac[i] * &at_atoms[i];
                }
                // sup over the preimages that may lie in the patch; tau >= 0
                let mut sup: Option<BallReal> = None;
                for (yi, (_, m)) in pre[i].iter().enumerate() {
                    if m[k] != Membership::Out {
                        let v = &at_pre[i][yi];
                        sup = Some(match sup {
                            None => v.clone(),
                            Some(s) => s.max(v),
                        });
                    }
                }
                if let Some(s) = sup {
                    term = &term - &s;
                }
                acc = &acc + &term.mul_rational(w, p).round(p);
            }
            rows.push(ResidualRow { patch: k, test: t, value: acc, slack: slack.clone() });
        }
    }
    Ok(MembershipReport { rows, tol: tol.clone(), mesh: mesh.clone() })
}

/// Outcome of the tangent-functional test.
#[derive(Clone, Debug)]
pub enum TangentOutcome {
    /// No witness certainly violates the inequality; `margin` is the smallest gap.
    Pass { margin: BallReal },
    /// `gap` encloses `P_i - <nu, psi_i> + <nu, phi> - (p_lower - tol)` and is certainly negative.
    Fail { index: usize, gap: BallReal },
}

impl TangentOutcome {
    pub fn passes(&self) -> bool {
        matches!(self, TangentOutcome::Pass { .. })
    }
}

/// Integral of a potential against a sphere measure, widened by the displacement.
pub fn integrate_potential(
    nu: &FiniteMeasure<crate::sphere::SpherePoint>,
    phi: &Potential,
    prec: i64,
) -> BallReal {
    let v = integrate(nu, |x| phi.eval_point(x, prec + 8), prec);
    let slack = nu.displacement().to_rational() * phi.holder_bound();
    v.add_error(&Dyadic::from_rational(&slack, prec + 8, Round::Ceil))
}

/// Checks `min_i (P_i - <nu, psi_i>) + <nu, phi> >= p_lower - tol`.
///
/// `P_i` must bound `P(T, psi_i)` from above and `p_lower` must bound
/// `P(T, phi)` from below; the last term of each directed sequence is used.
pub fn tangent_certificate(
    nu: &FiniteMeasure<crate::sphere::SpherePoint>,
    phi: &Potential,
    witnesses: &[(Potential, DirectedReal)],
    p_lower: &DirectedReal,
    tol: &BigRational,
    prec: i64,
) -> Result<TangentOutcome> {
    if p_lower.direction != Direction::Lower {
        return Err(Error::Invalid("pressure lower bound must be a lower sequence".into()));
    }
    let low = p_lower.current().ok_or_else(|| Error::Invalid("empty lower bound".into()))?;
    let base = &integrate_potential(nu, phi, prec) - &BallReal::exact(low.clone());
    let base = &base + &BallReal::from_rational(tol, prec);
    let mut margin: Option<BallReal> = None;
    for (i, (psi, up)) in witnesses.iter().enumerate() {
        if up.direction != Direction::Upper {
            return Err(Error::Invalid(format!("witness {i}: pressure bound must be an upper sequence")));
        }
        let pi = up.current().ok_or_else(|| Error::Invalid(format!("witness {i}: empty bound")))?;
        let gap = &(&BallReal::exact(pi.clone()) - &integrate_potential(nu, psi, prec)) + &base;
        if gap.is_negative() {
            return Ok(TangentOutcome::Fail { index: i, gap });
        }
        margin = Some(match margin {
            Some(m) if m.mid <= gap.mid => m,
            _ => gap,
        });
    }
    Ok(TangentOutcome::Pass { margin: margin.unwrap_or_else(|| base.clone()) })
}

/// Upper bound `log(e^height + d - 1)` on `P(f, height * tau)` for a hat `tau`
/// whose support meets at most one preimage of every point.
pub fn single_branch_pressure_bound(degree: usize, height: &BigRational, prec: i64) -> Result<Dyadic> {
    let e = BallReal::from_rational(height, prec + 8).exp(prec + 8)?;
    let s = &e + &BallReal::from_int(degree as i64 - 1);
    Ok(s.log(prec + 8)?.hi().round_abs(prec, Round::Ceil))
}

/// `W(mu, T_* mu)`.
pub fn invariance_residual<P: MetricPoint>(
    mu: &FiniteMeasure<P>,
    image: impl FnMut(&P) -> Option<P>,
    prec: i64,
) -> Result<TransportResult> {
    let nu = pushforward(mu, image)?;
    wasserstein(mu, &nu, prec)
}

impl std::str::FromStr for JacobianSpec {
    type Err = Error;

    /// `const:q` or a JSON object.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(format!("jacobian: {e}")));
        }
        match s.split_once(':') {
            Some(("const", q)) => Ok(JacobianSpec::constant(crate::numerics::parse_rational(q)?)),
            _ => Err(Error::Parse(format!("jacobian `{s}`: expected const:q or JSON"))),
        }
    }
}
