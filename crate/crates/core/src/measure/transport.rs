//! Kantorovich distance between finite measures.
//!
//! Costs are pinned to integers `round(d * 2^40)` from a floating-point
//! distance, the transport problem is solved exactly over the integers, and
//! the answer is widened by the pinning error and the atoms' displacement.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::simplex;
use super::{FiniteMeasure, MetricPoint};
use crate::error::{Error, Result};
use crate::numerics::{BallReal, Dyadic, Round};

/// Costs are integers in units of `2^-COST_SCALE_LOG2`.
pub const COST_SCALE_LOG2: i64 = 40;
/// `|pinned cost - true distance| <= 2^COST_ERROR_LOG2` for every pair.
pub const COST_ERROR_LOG2: i64 = -39;

/// Integer cost between two embedded points.
pub fn pinned_cost<P: MetricPoint>(a: &P::Embed, b: &P::Embed) -> i64 {
    (P::embedded_distance(a, b) * (1u64 << COST_SCALE_LOG2) as f64).round() as i64
}

#[derive(Clone, Debug)]
pub struct TransportResult {
    /// Encloses the Kantorovich distance between the measures the atoms stand for.
    pub value: BallReal,
    /// Optimal value for the pinned costs, exact.
    pub pinned_value: BigRational,
    /// `(i, j, mass)` moved from atom `i` of the first measure to atom `j` of the second.
    pub plan: Vec<(usize, usize, BigRational)>,
    /// Whether the dual potentials certified optimality of the plan.
    pub certified: bool,
}

fn integer_supplies<P: MetricPoint>(m: &FiniteMeasure<P>, den: &BigInt) -> Result<Vec<i128>> {
    m.atoms()
        .iter()
        .map(|(_, w)| {
            let s = w.numer() * (den / w.denom());
            s.to_i128().ok_or_else(|| Error::Invalid("weights need denominators below 2^100".into()))
        })
        .collect()
}

/// Exact optimum of the pinned problem, in units of `2^-40`, with its plan.
pub fn wasserstein_pinned<P: MetricPoint>(mu: &FiniteMeasure<P>, nu: &FiniteMeasure<P>) -> Result<TransportResult> {
    if mu.total_mass() != nu.total_mass() {
        return Err(Error::MassMismatch);
    }
    if mu.is_empty() {
        return Err(Error::NotProbability);
    }
    let den = mu.atoms().iter().chain(nu.atoms()).fold(BigInt::from(1), |d, (_, w)| d.lcm(w.denom()));
    if den.bits() > 100 {
        return Err(Error::Invalid("weights need denominators below 2^100".into()));
    }
    let a = integer_supplies(mu, &den)?;
    let b = integer_supplies(nu, &den)?;
    let ea: Vec<P::Embed> = mu.atoms().iter().map(|(p, _)| p.embed()).collect();
    let eb: Vec<P::Embed> = nu.atoms().iter().map(|(p, _)| p.embed()).collect();
    let cost = |i: usize, j: usize| pinned_cost::<P>(&ea[i], &eb[j]);
    let sol = simplex::solve(&a, &b, &cost);
    let certified = simplex::certify(&sol, a.len(), b.len(), &cost);
    let scale = &den << (COST_SCALE_LOG2 as u64);
    let pinned_value = BigRational::new(sol.objective.clone(), scale);
    let plan = sol.flows.iter().map(|&(i, j, f)| (i, j, BigRational::new(BigInt::from(f), den.clone()))).collect();
    Ok(TransportResult { value: BallReal::zero(), pinned_value, plan, certified })
}

/// `W(mu, nu)` enclosed with radius at most `2^-39 + 2^-prec + displacement(mu) + displacement(nu)`.
pub fn wasserstein<P: MetricPoint>(mu: &FiniteMeasure<P>, nu: &FiniteMeasure<P>, prec: i64) -> Result<TransportResult> {
    let mut r = wasserstein_pinned(mu, nu)?;
    if !r.certified {
        return Err(Error::Invalid("transport optimality certificate failed".into()));
    }
    let mid = Dyadic::from_rational(&r.pinned_value, prec.max(COST_SCALE_LOG2) + 2, Round::Nearest);
    let rounding = Dyadic::pow2(-(prec.max(COST_SCALE_LOG2) + 2));
    // the pinning error is per unit of transported mass
    let pin = Dyadic::from_rational(&(mu.total_mass() * Dyadic::pow2(COST_ERROR_LOG2).to_rational()), 60, Round::Ceil);
    let err = &(&(&pin + &rounding) + mu.displacement()) + nu.displacement();
    r.value = BallReal::exact(mid).add_error(&err);
    if r.value.lo().is_negative() {
        let hi = r.value.hi();
        r.value = BallReal::from_interval(&Dyadic::zero(), &hi);
    }
    Ok(r)
}
