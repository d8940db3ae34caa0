//! Ruelle operators, topological pressure and backward-orbit equilibrium states.

mod potential;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::numerics::{format_rational, BallReal, Dyadic, GaussRat, Round};
use crate::ratmap::{Chart, ChartPoint, RationalMap};
use crate::sphere::{chordal_sq, ideal_enumerate, SpherePoint};

pub use potential::Potential;

/// Largest preimage tree expanded, in leaves.
pub const MAX_LEAVES: u64 = 1 << 22;

/// A depth-`m` preimage `y` of the root, with `deg_{f^m}(y)` and `S_m phi(y)`.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub point: ChartPoint,
    pub multiplicity: BigInt,
    pub birkhoff: BallReal,
}

/// Deepest tree with at most [`MAX_LEAVES`] leaves for a degree-`d` map.
pub fn depth_limit(d: usize) -> u64 {
    let mut m = 0u64;
    let mut leaves = 1u64;
    while leaves.saturating_mul(d as u64) <= MAX_LEAVES {
        leaves *= d as u64;
        m += 1;
    }
    m
}

fn check_depth(f: &RationalMap, m: usize) -> Result<()> {
    let limit = depth_limit(f.degree());
    if m as u64 > limit {
        return Err(Error::DepthLimit { needed: m as u64, limit });
    }
    Ok(())
}

/// Expands `f^{-m}(x)` level by level. Preimage discs have chordal radius near `2^-l`.
pub fn preimage_tree(f: &RationalMap, phi: &Potential, x: &SpherePoint, m: usize, l: u32, prec: i64) -> Result<Vec<Leaf>> {
    check_depth(f, m)?;
    let mut level = vec![Leaf { point: ChartPoint::exact(x), multiplicity: BigInt::one(), birkhoff: BallReal::zero() }];
    let flat = phi.as_constant().cloned();
    let step = flat.as_ref().map(|c| BallReal::from_rational(c, prec + 8));
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * f.degree());
        for node in &level {
            for c in f.preimages_of_disc(&node.point, l)? {
                let v = match &step {
                    Some(s) => s.clone(),
                    None => phi.eval(&c.point, prec + 8),
                };
                let birkhoff = if flat.as_ref().is_some_and(|c| c.is_zero()) {
                    BallReal::zero()
                } else {
                    (&node.birkhoff + &v).round(prec + 8)
                };
                next.push(Leaf { point: c.point, multiplicity: &node.multiplicity * BigInt::from(c.multiplicity), birkhoff });
            }
        }
        level = next;
    }
    Ok(level)
}

/// Fails with `ExcludedPoint` when `x = f^i(inf)` for some `1 <= i <= m`.
fn check_excluded(f: &RationalMap, x: &SpherePoint, m: usize) -> Result<()> {
    if f.orbit_of_infinity(m).contains(x) {
        return Err(Error::ExcludedPoint);
    }
    Ok(())
}

/// `S_n phi(x) = sum_{k < n} phi(f^k(x))` along the exact orbit.
pub fn birkhoff_sum(f: &RationalMap, phi: &Potential, x: &SpherePoint, n: usize, prec: i64) -> Result<BallReal> {
    let orbit = f.orbit(x, n);
    let extra = (usize::BITS - n.leading_zeros()) as i64 + 4;
    let mut acc = BallReal::zero();
    for p in orbit.iter().take(n) {
        acc = &acc + &phi.eval_point(p, prec + extra);
    }
    Ok(acc)
}

fn sum_leaves(leaves: &[Leaf], u: &Potential, prec: i64) -> Result<BallReal> {
    let extra = 64 - (leaves.len() as u64).leading_zeros() as i64 + 4;
    let p = prec + extra;
    let mut acc = BallReal::zero();
    for leaf in leaves {
        let weight = if leaf.birkhoff.is_zero() { BallReal::one() } else { leaf.birkhoff.exp(p)? };
        let uy = match u.as_constant() {
            Some(c) => BallReal::from_rational(c, p),
            None => u.eval(&leaf.point, p),
        };
        let term = (&weight * &uy).round(p);
        acc = &acc + &term.mul_rational(&BigRational::from_integer(leaf.multiplicity.clone()), p);
    }
    Ok(acc)
}

/// Encloses `L_phi^m(u)(x)` with radius at most `2^-n`.
pub fn ruelle_apply(f: &RationalMap, phi: &Potential, u: &Potential, x: &SpherePoint, m: usize, n: i64) -> Result<BallReal> {
    check_excluded(f, x, m)?;
    check_depth(f, m)?;
    let target = Dyadic::pow2(-n);
    // the sum can be as large as d^m e^{m sup|phi|}
    let scale = (f.degree() as f64).log2() * m as f64
        + phi.sup_bound().to_f64().unwrap_or(0.0) * m as f64 * std::f64::consts::LOG2_E
        + u.sup_bound().to_f64().unwrap_or(0.0).max(1.0).log2();
    let mut extra = scale.ceil().max(0.0) as i64 + 8;
    loop {
        let prec = n + extra;
        let l = u32::try_from(prec.max(16)).unwrap_or(u32::MAX);
        if prec as u64 > crate::ratmap::MAX_BITS {
            return Err(Error::PrecisionExhausted { bits: prec as u64 });
        }
        let leaves = preimage_tree(f, phi, x, m, l, prec)?;
        let v = sum_leaves(&leaves, u, prec)?;
        if v.rad <= target {
            return Ok(v.round(n + 2));
        }
        extra *= 2;
    }
}

/// Whether `N` is derived from the truncation bound or from agreement of successive estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PressureMode {
    Certified,
    Empirical,
}

#[derive(Clone, Debug)]
pub struct PressureOptions {
    /// Requested accuracy: the result has radius at most `2^-n`.
    pub n: i64,
    /// Hölder exponent the bound `r` refers to; recorded, not used.
    pub alpha: BigRational,
    /// Upper bound on the Hölder seminorm of the potential.
    pub r: BigRational,
    /// Constant in `|N^-1 log L^N 1 - P| <= C0 R / N`.
    pub c0: BigRational,
    pub mode: PressureMode,
    /// Number of ideal points tried as anchors.
    pub anchor_search: u64,
}

impl PressureOptions {
    pub fn certified(n: i64, c0: BigRational, r: BigRational) -> Self {
        PressureOptions { n, alpha: BigRational::one(), r, c0, mode: PressureMode::Certified, anchor_search: 1000 }
    }

    pub fn empirical(n: i64) -> Self {
        PressureOptions {
            n,
            alpha: BigRational::one(),
            r: BigRational::zero(),
            c0: BigRational::zero(),
            mode: PressureMode::Empirical,
            anchor_search: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PressureResult {
    pub value: BallReal,
    pub n_used: u64,
    pub anchor: SpherePoint,
    pub anchor_index: u64,
    pub c0_used: BigRational,
    pub r_used: BigRational,
    pub alpha: BigRational,
    /// `C0 R / N`, already folded into `value.rad`.
    pub truncation: BigRational,
    pub mode: PressureMode,
    pub requested_bits: i64,
}

impl PressureResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "value": self.value.mid.to_f64(),
            "value_mid": format_rational(&self.value.mid.to_rational()),
            "radius": self.value.rad.to_f64(),
            "radius_exact": format_rational(&self.value.rad.to_rational()),
            "N_used": self.n_used,
            "anchor": self.anchor,
            "anchor_index": self.anchor_index,
            "c0_used": format_rational(&self.c0_used),
            "R": format_rational(&self.r_used),
            "alpha": format_rational(&self.alpha),
            "truncation": format_rational(&self.truncation),
            "mode": self.mode,
            "n": self.requested_bits,
        })
    }
}

/// First ideal point farther than `2^-n` from every `f^i(inf)`, `1 <= i <= big_n`,
/// and from the exceptional set, whose backward orbits do not equidistribute.
pub fn select_anchor(f: &RationalMap, big_n: usize, n: i64, search: u64) -> Result<(u64, SpherePoint)> {
    let mut avoid = f.orbit_of_infinity(big_n);
    avoid.extend(f.exceptional_set()?);
    let r2 = Dyadic::pow2(-2 * n).to_rational();
    for k in 1..=search {
        let s = ideal_enumerate(k);
        if avoid.iter().all(|p| chordal_sq(&s, p) > r2) {
            return Ok((k, s));
        }
    }
    Err(Error::ExcludedAnchor(search))
}

/// `N^-1 log L^N(1)(s)` with radius at most `2^-bits`.
fn log_average(f: &RationalMap, phi: &Potential, s: &SpherePoint, big_n: usize, bits: i64) -> Result<BallReal> {
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(big_n));
    let mut p = bits + 8;
    loop {
        if p as u64 > crate::ratmap::MAX_BITS {
            return Err(Error::PrecisionExhausted { bits: p as u64 });
        }
        let l = ruelle_apply(f, phi, &Potential::constant(BigRational::one()), s, big_n, p)?;
        // L^N 1 can be as small as e^{-N sup|phi|}; refine until it is certainly positive
        if !l.is_positive() {
            p += 16;
            continue;
        }
        let w = l.log(p + 4)?.mul_rational(&inv_n, p + 4);
        if w.rad <= Dyadic::pow2(-bits) {
            return Ok(w);
        }
        p += 16;
    }
}

/// Topological pressure `P(f, phi)` to within `2^-n`.
///
/// In certified mode `N = floor(2^{n+1} C0 R) + 1`, so the truncation error
/// `C0 R / N` is below `2^{-n-1}`, and the operator sum is evaluated to
/// `2^{-n-1}`. Empirical mode increases `N` until two successive estimates
/// agree to `2^{-n-2}`; its radius covers evaluation error only.
pub fn pressure(f: &RationalMap, phi: &Potential, opts: &PressureOptions) -> Result<PressureResult> {
    let n = opts.n;
    let limit = depth_limit(f.degree());
    match opts.mode {
        PressureMode::Certified => {
            if opts.c0.is_negative() || opts.r.is_negative() {
                return Err(Error::Invalid("C0 and R must be nonnegative".into()));
            }
            let bound = &opts.c0 * &opts.r * BigRational::from_integer(BigInt::one() << (n + 1) as usize);
            let big_n = bound.floor().to_integer() + BigInt::one();
            let big_n_u = big_n.to_u64().filter(|&v| v <= limit).ok_or(Error::DepthLimit {
                needed: big_n.to_u64().unwrap_or(u64::MAX),
                limit,
            })?;
            let (anchor_index, anchor) = select_anchor(f, big_n_u as usize, n, opts.anchor_search)?;
            let w = log_average(f, phi, &anchor, big_n_u as usize, n + 1)?;
            let truncation = &opts.c0 * &opts.r / BigRational::from_integer(big_n);
            let trunc_d = Dyadic::from_rational(&truncation, n + 40, Round::Ceil);
            let value = w.add_error(&trunc_d);
            Ok(PressureResult {
                value,
                n_used: big_n_u,
                anchor,
                anchor_index,
                c0_used: opts.c0.clone(),
                r_used: opts.r.clone(),
                alpha: opts.alpha.clone(),
                truncation,
                mode: PressureMode::Certified,
                requested_bits: n,
            })
        }
        PressureMode::Empirical => {
            let tol = Dyadic::pow2(-n - 2);
            let mut prev: Option<BallReal> = None;
            for big_n in 1..=limit as usize {
                let (anchor_index, anchor) = select_anchor(f, big_n, n, opts.anchor_search)?;
                let w = log_average(f, phi, &anchor, big_n, n + 3)?;
                if let Some(p) = &prev {
                    if (&w.mid - &p.mid).abs() <= tol {
                        return Ok(PressureResult {
                            value: w,
                            n_used: big_n as u64,
                            anchor,
                            anchor_index,
                            c0_used: opts.c0.clone(),
                            r_used: opts.r.clone(),
                            alpha: opts.alpha.clone(),
                            truncation: BigRational::zero(),
                            mode: PressureMode::Empirical,
                            requested_bits: n,
                        });
                    }
                }
                prev = Some(w);
            }
            Err(Error::DepthLimit { needed: limit + 1, limit })
        }
    }
}

/// Chart coordinates are rounded to this many fractional bits in measure atoms.
const ATOM_BITS: i64 = 48;

fn round_leaf(p: &ChartPoint) -> SpherePoint {
    let r = |q: &BigRational| Dyadic::from_rational(q, ATOM_BITS, Round::Nearest).to_rational();
    let c = if p.is_exact() { p.center.clone() } else { GaussRat::new(r(&p.center.re), r(&p.center.im)) };
    let s = SpherePoint::Finite(c);
    match p.chart {
        Chart::Primary => s,
        Chart::Inverted => s.invert(),
    }
}

/// Depth-`depth` preimages of `x` weighted by `deg_{f^depth}(y) e^{S_depth phi(y)}`, normalized to mass one.
///
/// Inexact preimages are stored at rounded disc centers; the measure's
/// displacement bounds the chordal distance from each atom to the true point.
pub fn backward_orbit_measure(f: &RationalMap, phi: &Potential, x: &SpherePoint, depth: usize) -> Result<FiniteMeasure<SpherePoint>> {
    if *x == SpherePoint::Infinity && depth > 0 || f.orbit_of_infinity(depth).contains(x) {
        return Err(Error::ExcludedPoint);
    }
    let prec = 60;
    let leaves = preimage_tree(f, phi, x, depth, prec as u32, prec)?;
    let mut disp = Dyadic::zero();
    let mut rounded = false;
    for leaf in &leaves {
        disp = Dyadic::max(&disp, &leaf.point.chordal_radius());
        rounded |= !leaf.point.is_exact();
    }
    if rounded {
        // rounding moves a chart coordinate by at most 2^-48 sqrt 2, and the chart density is at most 2
        disp = &disp + &Dyadic::pow2(-ATOM_BITS + 2);
    }
    let weights: Vec<BigRational> = if phi.is_zero() {
        leaves.iter().map(|l| BigRational::from_integer(l.multiplicity.clone())).collect()
    } else {
        leaves
            .iter()
            .map(|l| {
                let e = l.birkhoff.exp(prec)?;
                Ok(e.mid.to_rational() * BigRational::from_integer(l.multiplicity.clone()))
            })
            .collect::<Result<_>>()?
    };
    let total: BigRational = weights.iter().fold(BigRational::zero(), |a, b| a + b);
    let atoms = leaves.iter().zip(weights).map(|(l, w)| (round_leaf(&l.point), w / &total));
    Ok(FiniteMeasure::merged(atoms)?.with_displacement(disp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat_int;

    #[test]
    fn quadratic_tree_sizes() {
        let f: RationalMap = "z^2".parse().unwrap();
        let one = Potential::constant(rat_int(1));
        let v = ruelle_apply(&f, &Potential::zero(), &one, &SpherePoint::from_int(1), 3, 20).unwrap();
        assert!(v.contains(&Dyadic::from_int(8)));
        assert_eq!(depth_limit(2), 22);
    }

    #[test]
    fn infinity_is_excluded() {
        let f: RationalMap = "z^2".parse().unwrap();
        let one = Potential::constant(rat_int(1));
        assert_eq!(
            ruelle_apply(&f, &Potential::zero(), &one, &SpherePoint::Infinity, 1, 20).unwrap_err(),
            Error::ExcludedPoint
        );
    }
}
