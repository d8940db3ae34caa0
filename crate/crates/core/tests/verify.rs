use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use equistate::measure::{pushforward, FiniteMeasure, Hat};
use equistate::numerics::{rat, rat_int, BallReal, DirectedReal, Direction, Dyadic, Round};
use equistate::ratmap::RationalMap;
use equistate::sphere::SpherePoint;
use equistate::thermo::{backward_orbit_measure, pressure, Potential, PressureOptions};
use equistate::thurston::{max_tile_diameter, mme_tile_measure, RuleName, SubdivisionMap, TileComplex, TilePoint};
use equistate::verify::{
    atom_mesh, atomic_jacobian, default_tol, hat_family, invariance_residual, jacobian_unitarity, membership_residual,
    rokhlin_lower_bound, single_branch_pressure_bound, tangent_certificate, JacobianSpec, SpherePatch, SpherePatches,
    TilePatches,
};

fn map(s: &str) -> RationalMap {
    s.parse().unwrap()
}

fn pt(re: i64, im: i64) -> SpherePoint {
    SpherePoint::finite(rat(re, 1), rat(im, 1))
}

fn q(d: &Dyadic) -> BigRational {
    d.to_rational()
}

fn log2_ball() -> BallReal {
    pressure(&map("z^2"), &Potential::zero(), &PressureOptions::certified(8, rat_int(1), rat_int(0))).unwrap().value
}

fn upper(x: &BallReal) -> DirectedReal {
    DirectedReal::from_terms(Direction::Upper, vec![x.hi().round_abs(60, Round::Ceil)]).unwrap()
}

fn lower(x: &BallReal) -> DirectedReal {
    DirectedReal::from_terms(Direction::Lower, vec![x.lo().round_abs(60, Round::Floor)]).unwrap()
}

#[test]
fn unitarity_examples() {
    let sys = SpherePatches::half_planes(map("z^2")).unwrap();
    let r = jacobian_unitarity(&sys, &JacobianSpec::constant(rat_int(2)), &pt(4, 0), 40).unwrap();
    assert!(r.contains(&Dyadic::zero()));
    let r = jacobian_unitarity(&sys, &JacobianSpec::constant(rat_int(3)), &pt(1, 0), 40).unwrap();
    assert!(r.contains_rational(&rat(1, 3)));

    // exp(P - phi) with phi = 0 and P = log 2 is the constant 2
    let j = JacobianSpec::Potential { pressure: log2_ball(), phi: Potential::zero(), h: Potential::zero() };
    for x in [pt(4, 0), pt(2, 3), pt(-1, 1)] {
        let r = jacobian_unitarity(&sys, &j, &x, 40).unwrap();
        assert!(r.contains(&Dyadic::zero()), "{x}: {r}");
        assert!(r.hi() <= Dyadic::pow2(-20));
    }
}

#[test]
fn atomic_jacobian_examples() {
    let f = map("z^2");
    let img = |x: &SpherePoint| Some(f.apply(x));
    let j = atomic_jacobian(&FiniteMeasure::dirac(pt(1, 0)), img).unwrap();
    assert_eq!(j[&pt(1, 0)], BigRational::one());

    // 0 -> -1 -> 0 under z^2 - 1
    let g = map("z^2-1");
    let img = |x: &SpherePoint| Some(g.apply(x));
    let cycle = FiniteMeasure::uniform(vec![pt(0, 0), pt(-1, 0)]).unwrap();
    let j = atomic_jacobian(&cycle, img).unwrap();
    assert!(j.values().all(|v| v.is_one()));

    let tilted = FiniteMeasure::new(vec![(pt(0, 0), rat(2, 3)), (pt(-1, 0), rat(1, 3))]).unwrap();
    let j = atomic_jacobian(&tilted, img).unwrap();
    assert_eq!(j[&pt(0, 0)], rat(1, 2));
    assert_eq!(j[&pt(-1, 0)], rat_int(2));
}

#[test]
fn rokhlin_examples() {
    let two = |_: &SpherePoint| Ok(BallReal::from_int(2));
    let circle = FiniteMeasure::uniform(vec![pt(1, 0), pt(-1, 0), pt(0, 1), pt(0, -1)]).unwrap();
    let ln2 = std::f64::consts::LN_2;
    for mu in [circle, FiniteMeasure::dirac(pt(1, 0))] {
        let h = rokhlin_lower_bound(&mu, two, 40).unwrap();
        assert!((h.to_f64() - ln2).abs() <= h.rad.to_f64() + 1e-15);
    }

    let tiles = mme_tile_measure(&SubdivisionMap::get(RuleName::G1), 3);
    let h = rokhlin_lower_bound(&tiles, |_| Ok(BallReal::from_int(6)), 40).unwrap();
    assert!((h.to_f64() - 6f64.ln()).abs() <= h.rad.to_f64() + 1e-15);
    assert!(rokhlin_lower_bound(&tiles, |_| Ok(BallReal::zero()), 40).is_err());
}

#[test]
fn membership_rejects_a_fixed_point() {
    let sys = SpherePatches::half_planes(map("z^2")).unwrap();
    let j = JacobianSpec::constant(rat_int(2));
    let centers: Vec<SpherePoint> = [(1, 0), (-1, 0), (0, 1), (2, 1)].iter().map(|&(a, b)| pt(a, b)).collect();
    let tests = hat_family(&centers, &[rat(1, 2), rat(1, 8)]);
    let delta = FiniteMeasure::dirac(pt(1, 0));
    let tol = default_tol();
    let r = membership_residual(&delta, &sys, &j, &tests, &atom_mesh(&delta), &tol, 30).unwrap();
    assert!(!r.passes());
    let top = r.worst().unwrap();
    assert!(top.value.contains_rational(&BigRational::one()), "{}", top.value);
}

#[test]
fn membership_of_tile_measures_is_within_one_tile() {
    let g = SubdivisionMap::get(RuleName::G1);
    let sys = TilePatches::new(g.clone());
    let j = JacobianSpec::constant(rat_int(6));
    let centers = TileComplex::build(&g, 1).vertices();
    let widths = [rat(1, 2), rat(1, 4)];
    let tests = hat_family(&centers, &widths);
    let tol = default_tol();
    for n in 1..=3 {
        let mu = mme_tile_measure(&g, n);
        let r = membership_residual(&mu, &sys, &j, &tests, &atom_mesh(&mu), &tol, 30).unwrap();
        assert!(r.passes(), "level {n}");
        let diam = q(&max_tile_diameter(&TileComplex::build(&g, n), 40).hi());
        for row in &r.rows {
            let lip = tests[row.test].lipschitz();
            assert!(q(&row.value.hi()) <= &lip * &diam + &tol, "level {n}: row {row:?}");
        }
    }
}

fn constant_witness(c: BigRational, p0: &BallReal) -> (Potential, DirectedReal) {
    (Potential::constant(c.clone()), upper(&(p0 + &BallReal::from_rational(&c, 80))))
}

#[test]
fn tangent_with_constant_witnesses_passes() {
    let p0 = log2_ball();
    let nu = backward_orbit_measure(&map("z^2"), &Potential::zero(), &pt(3, 0), 6).unwrap();
    let ws: Vec<_> = [-1, 0, 1].into_iter().map(|c| constant_witness(rat_int(c), &p0)).collect();
    let out = tangent_certificate(&nu, &Potential::zero(), &ws, &lower(&p0), &default_tol(), 40).unwrap();
    assert!(out.passes());

    // psi = phi: the gap is P(phi) upper minus P(phi) lower
    let phi = Potential::basis(pt(2, 0));
    let p_phi = pressure(&map("z^2"), &phi, &PressureOptions::empirical(8)).unwrap().value;
    let ws = vec![(phi.clone(), upper(&p_phi))];
    assert!(tangent_certificate(&nu, &phi, &ws, &lower(&p_phi), &default_tol(), 40).unwrap().passes());
}

#[test]
fn tangent_catches_a_concentrated_measure() {
    let p0 = log2_ball();
    let height = rat_int(4);
    let bump = Potential::scale(height.clone(), Potential::hat(Hat::new(pt(1, 0), BigRational::zero(), rat(1, 4))));
    let bound = single_branch_pressure_bound(2, &height, 40).unwrap();
    let ws = vec![(bump, DirectedReal::from_terms(Direction::Upper, vec![bound]).unwrap())];
    let out = tangent_certificate(&FiniteMeasure::dirac(pt(1, 0)), &Potential::zero(), &ws, &lower(&p0), &default_tol(), 40)
        .unwrap();
    assert!(!out.passes());
}

#[test]
fn invariance_examples() {
    let f = map("z^2");
    let img = |x: &SpherePoint| Some(f.apply(x));
    let r = invariance_residual(&FiniteMeasure::dirac(pt(1, 0)), img, 40).unwrap();
    assert!(r.value.contains(&Dyadic::zero()));

    // the pushforward is delta_1, at chordal distance 2 from half the mass
    let pair = FiniteMeasure::uniform(vec![pt(1, 0), pt(-1, 0)]).unwrap();
    let r = invariance_residual(&pair, img, 40).unwrap();
    assert!(r.value.contains(&Dyadic::one()), "{}", r.value);
}

#[test]
fn tile_measures_push_forward_exactly() {
    for rule in [RuleName::G1, RuleName::G2] {
        let g = SubdivisionMap::get(rule);
        for n in 1..=3 {
            let fine = mme_tile_measure(&g, n);
            let image = pushforward(&fine, |p: &TilePoint| Some(g.eval(p))).unwrap();
            assert_eq!(image, mme_tile_measure(&g, n - 1), "{rule:?} level {n}");
            // the residual is then the distance between consecutive levels
            let r = invariance_residual(&fine, |p: &TilePoint| Some(g.eval(p)), 40).unwrap();
            let diam = max_tile_diameter(&TileComplex::build(&g, n - 1), 40);
            assert!(r.value.lo() <= diam.hi());
        }
    }
}

/// Cycles of `g` among the vertices of the level-2 complex.
fn vertex_cycles(g: &SubdivisionMap) -> Vec<Vec<TilePoint>> {
    let verts = TileComplex::build(g, 2).vertices();
    let mut cycles: Vec<Vec<TilePoint>> = Vec::new();
    for v in &verts {
        let mut orbit = vec![v.clone()];
        let mut x = g.eval(v);
        while &x != v && orbit.len() <= verts.len() {
            orbit.push(x.clone());
            x = g.eval(&x);
        }
        if &x == v && !cycles.iter().any(|c| c.contains(v)) {
            cycles.push(orbit);
        }
    }
    cycles
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rokhlin_stays_below_topological_pressure(weights in prop::collection::vec(1i64..10, 1..8), rule in 0usize..2) {
        let g = SubdivisionMap::get([RuleName::G1, RuleName::G2][rule]);
        let cycles = vertex_cycles(&g);
        prop_assert!(!cycles.is_empty());
        let total: i64 = cycles.iter().zip(weights.iter().cycle()).map(|(c, w)| w * c.len() as i64).sum();
        let mut atoms = Vec::new();
        for (c, w) in cycles.iter().zip(weights.iter().cycle()) {
            for p in c {
                atoms.push((p.clone(), rat(*w, total)));
            }
        }
        let mu = FiniteMeasure::new(atoms).unwrap();
        let img = |p: &TilePoint| Some(g.eval(p));
        prop_assert_eq!(pushforward(&mu, img).unwrap(), mu.clone());
        let jac: BTreeMap<TilePoint, BigRational> = atomic_jacobian(&mu, img).unwrap();
        let h = rokhlin_lower_bound(&mu, |p| Ok(BallReal::from_rational(&jac[p], 60)), 40).unwrap();
        let top = BallReal::from_int(g.degree() as i64).log(40).unwrap();
        prop_assert!(h.lo() <= top.hi());
    }

    #[test]
    fn fixed_points_are_rejected_at_every_scale(which in 0usize..3, r in 0i64..8, eps in 1i64..16) {
        let (f, p, d) = [("z^2", pt(1, 0), 2), ("z^3", pt(1, 0), 3), ("z^3", pt(-1, 0), 3)][which].clone();
        let disc = SpherePatch::Disc { center: p.clone(), radius: rat(1, 2) };
        let sys = SpherePatches::new(map(f), vec![disc]).unwrap();
        let tau = Hat::new(p.clone(), rat(r, 16), rat(eps, 16));
        let delta = FiniteMeasure::dirac(p);
        let tol = default_tol();
        let rep = membership_residual(&delta, &sys, &JacobianSpec::constant(rat_int(d)), &[tau], &BigRational::zero(), &tol, 30).unwrap();
        prop_assert!(!rep.passes());
        prop_assert!(rep.rows[0].value.contains_rational(&rat_int(d - 1)));
    }

    #[test]
    fn adding_witnesses_never_rescues_a_failure(
        heights in prop::collection::vec((-8i64..8, 0usize..4), 1..5),
        extra in prop::collection::vec((-8i64..8, 0usize..4), 0..4),
        slack in -4i64..4,
    ) {
        let p0 = log2_ball();
        let centers = [pt(1, 0), pt(-1, 0), pt(0, 1), pt(2, 0)];
        let witness = |(h, c): (i64, usize)| {
            let psi = Potential::scale(rat(h, 2), Potential::hat(Hat::new(centers[c].clone(), BigRational::zero(), rat(1, 4))));
            // an upper value that is sometimes too small, so both verdicts occur
            let up = &p0 + &BallReal::from_rational(&rat(h.max(0) + slack, 4), 60);
            (psi, upper(&up))
        };
        let nu = FiniteMeasure::uniform(vec![pt(1, 0), pt(0, 1)]).unwrap();
        let small: Vec<_> = heights.iter().copied().map(witness).collect();
        let mut big = small.clone();
        big.extend(extra.iter().copied().map(witness));
        let a = tangent_certificate(&nu, &Potential::zero(), &small, &lower(&p0), &default_tol(), 40).unwrap();
        let b = tangent_certificate(&nu, &Potential::zero(), &big, &lower(&p0), &default_tol(), 40).unwrap();
        prop_assert!(a.passes() || !b.passes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn invariance_improves_with_depth(anchor in 2i64..10) {
        let f = map("z^2");
        let mut prev: Option<f64> = None;
        for depth in 2..=7 {
            let mu = backward_orbit_measure(&f, &Potential::zero(), &pt(anchor, 0), depth).unwrap();
            let r = invariance_residual(&mu, |x| Some(f.apply(x)), 40).unwrap();
            let v = r.value.to_f64() + mu.displacement().to_f64();
            if let Some(p) = prev {
                prop_assert!(v <= p + 1e-9, "anchor {}, depth {}: {} after {}", anchor, depth, v, p);
            }
            prev = Some(v);
        }
        prop_assert!(prev.unwrap() < 0.1);
    }
}

#[test]
fn jacobian_text_forms() {
    let j: JacobianSpec = "const:6".parse().unwrap();
    assert_eq!(j, JacobianSpec::constant(rat_int(6)));
    assert_eq!(j.sup_bound(), rat_int(6));
    let p = JacobianSpec::Potential { pressure: log2_ball(), phi: Potential::zero(), h: Potential::zero() };
    let back: JacobianSpec = serde_json::to_string(&p).unwrap().parse().unwrap();
    assert_eq!(back, p);
    assert!(p.sup_bound().to_f64().unwrap() >= 2.0);
}
