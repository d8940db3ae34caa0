use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use equistate::measure::{pushforward, FiniteMeasure};
use equistate::numerics::{rat, rat_int, BallReal, Dyadic};
use equistate::ratmap::RationalMap;
use equistate::sphere::SpherePoint;
use equistate::thermo::{
    backward_orbit_measure, birkhoff_sum, preimage_tree, pressure, ruelle_apply, Potential, PressureMode,
    PressureOptions,
};
use equistate::Error;

fn map(s: &str) -> RationalMap {
    s.parse().unwrap()
}

fn pt(re: i64, im: i64) -> SpherePoint {
    SpherePoint::finite(rat(re, 1), rat(im, 1))
}

fn certified() -> PressureOptions {
    PressureOptions::certified(8, rat_int(1), rat_int(0))
}

fn near(b: &BallReal, x: f64, slack: f64) -> bool {
    (b.to_f64() - x).abs() <= b.rad.to_f64() + slack
}

#[test]
fn birkhoff_examples() {
    let f = map("z^2");
    let phi = Potential::basis(pt(0, 0));
    assert!(birkhoff_sum(&f, &phi, &pt(3, 1), 0, 40).unwrap().contains(&Dyadic::zero()));

    let c = rat(2, 7);
    let s = birkhoff_sum(&f, &Potential::constant(c.clone()), &pt(3, 1), 5, 40).unwrap();
    assert!(s.contains_rational(&(c * rat_int(5))));

    let s = birkhoff_sum(&f, &phi, &pt(1, 0), 3, 40).unwrap();
    assert!(near(&s, 3.0 * std::f64::consts::SQRT_2, 1e-12));
    assert!(s.square().contains_rational(&rat_int(18)));
}

#[test]
fn ruelle_examples() {
    let f = map("z^2");
    let one = Potential::constant(BigRational::one());
    let v = ruelle_apply(&f, &Potential::zero(), &one, &pt(0, 1), 1, 30).unwrap();
    assert!(v.contains(&Dyadic::from_int(2)));
    let v = ruelle_apply(&f, &Potential::zero(), &one, &pt(1, 0), 3, 30).unwrap();
    assert!(v.contains(&Dyadic::from_int(8)));

    // sigma(2, 0) = sigma(-2, 0) = 4 / sqrt 5
    let v = ruelle_apply(&f, &Potential::basis(pt(0, 0)), &one, &pt(4, 0), 1, 40).unwrap();
    let expect = 2.0 * (4.0 / 5f64.sqrt()).exp();
    assert!(near(&v, expect, 1e-12 * expect));
    assert!(v.rad <= Dyadic::pow2(-40));
}

#[test]
fn ruelle_rejects_orbit_of_infinity() {
    let f = map("1/z^2");
    let one = Potential::constant(BigRational::one());
    // infinity -> 0 -> infinity, so 0 has a preimage tree through infinity
    assert_eq!(ruelle_apply(&f, &Potential::zero(), &one, &pt(0, 0), 1, 20).unwrap_err(), Error::ExcludedPoint);
}

#[test]
fn pressure_examples() {
    let ln2 = std::f64::consts::LN_2;
    for (s, c, expect) in [("z^2", 0, ln2), ("z^2", 1, ln2 + 1.0), ("z^2-2", 0, ln2)] {
        let r = pressure(&map(s), &Potential::constant(rat_int(c)), &certified()).unwrap();
        assert!(near(&r.value, expect, 1e-15), "{s}, c = {c}: {}", r.value);
        assert!(r.value.rad <= Dyadic::pow2(-8));
        assert_eq!(r.mode, PressureMode::Certified);
    }
}

#[test]
fn pressure_needs_truncation_depth() {
    let opts = PressureOptions::certified(8, rat_int(1), rat_int(1));
    let r = pressure(&map("z^2"), &Potential::basis(pt(0, 0)), &opts);
    assert!(matches!(r, Err(Error::DepthLimit { needed: 513, limit: 22 })));
}

#[test]
fn empirical_pressure_of_distance_to_origin() {
    // sigma(., 0) is sqrt 2 on the unit circle, which carries the measure of maximal entropy
    let r = pressure(&map("z^2"), &Potential::basis(pt(0, 0)), &PressureOptions::empirical(12)).unwrap();
    let expect = std::f64::consts::LN_2 + std::f64::consts::SQRT_2;
    assert!((r.value.to_f64() - expect).abs() < 1e-3, "{}", r.value);
}

#[test]
fn holder_bound_examples() {
    let f1 = Potential::basis(pt(0, 0));
    let f2 = Potential::basis(pt(1, 0));
    assert_eq!(f1.holder_bound(), rat_int(1));
    let p = Potential::scale(rat_int(3), Potential::prod(vec![f1.clone(), f2]));
    assert_eq!(p.holder_bound(), rat_int(12));
    assert_eq!(Potential::constant(rat(-5, 3)).holder_bound(), BigRational::zero());
    // like terms combine before the bound is taken
    let cancel = Potential::sum(vec![f1.clone(), Potential::scale(rat_int(-1), f1)]);
    assert_eq!(cancel.holder_bound(), BigRational::zero());
}

#[test]
fn potential_text_forms() {
    let p: Potential = "basis:1+i".parse().unwrap();
    assert_eq!(p, Potential::basis(SpherePoint::finite(rat_int(1), rat_int(1))));
    let q: Potential = "const:-3/4".parse().unwrap();
    assert_eq!(q.as_constant(), Some(&rat(-3, 4)));
    let json = serde_json::to_string(&Potential::scale(rat_int(2), p.clone())).unwrap();
    let back: Potential = json.parse().unwrap();
    assert_eq!(back, Potential::scale(rat_int(2), p));
}

#[test]
fn backward_orbit_examples() {
    let f = map("z^2");
    let mu = backward_orbit_measure(&f, &Potential::zero(), &pt(1, 0), 2).unwrap();
    let fourth = FiniteMeasure::uniform(vec![pt(1, 0), pt(-1, 0), pt(0, 1), pt(0, -1)]).unwrap();
    assert_eq!(mu, fourth);
    assert!(mu.displacement().is_zero());

    let mu = backward_orbit_measure(&f, &Potential::zero(), &pt(4, 0), 1).unwrap();
    assert_eq!(mu, FiniteMeasure::uniform(vec![pt(2, 0), pt(-2, 0)]).unwrap());

    // sigma(2, 1) = 2 / sqrt 10 and sigma(-2, 1) = 6 / sqrt 10
    let mu = backward_orbit_measure(&f, &Potential::basis(pt(1, 0)), &pt(4, 0), 1).unwrap();
    let (a, b) = ((2.0 / 10f64.sqrt()).exp(), (6.0 / 10f64.sqrt()).exp());
    let w2 = mu.weight_of(&pt(2, 0)).to_f64().unwrap();
    let wm2 = mu.weight_of(&pt(-2, 0)).to_f64().unwrap();
    assert!((w2 - a / (a + b)).abs() < 1e-12);
    assert!((wm2 - b / (a + b)).abs() < 1e-12);
    assert!(mu.is_probability());
}

#[test]
fn backward_orbit_lies_near_the_circle() {
    let mu = backward_orbit_measure(&map("z^2"), &Potential::zero(), &pt(3, 0), 10).unwrap();
    assert_eq!(mu.len(), 1024);
    for (p, w) in mu.atoms() {
        let (x, y) = p.as_finite().unwrap().to_f64();
        assert!(((x * x + y * y).sqrt() - 1.0).abs() < 2e-3);
        assert_eq!(*w, rat(1, 1024));
    }
}

#[test]
fn backward_orbit_pushes_forward_one_level() {
    let f = map("z^2");
    for (x, depth) in [(pt(1, 0), 1), (pt(1, 0), 2), (pt(16, 0), 2), (pt(-4, 0), 1)] {
        let fine = backward_orbit_measure(&f, &Potential::zero(), &x, depth).unwrap();
        let coarse = backward_orbit_measure(&f, &Potential::zero(), &x, depth - 1).unwrap();
        assert_eq!(pushforward(&fine, |p| Some(f.apply(p))).unwrap(), coarse, "{x} at depth {depth}");
    }
}

#[test]
fn semigroup_on_shared_trees() {
    let f = map("z^2");
    let phi = Potential::basis(pt(0, 0));
    let u = Potential::basis(pt(2, 1));
    let x = pt(1, 0);
    for (a, b) in [(1, 1), (1, 2), (2, 1), (3, 2)] {
        let whole = ruelle_apply(&f, &phi, &u, &x, a + b, 40).unwrap();
        // depth b over the tree of x, each leaf carrying L^a u
        let leaves = preimage_tree(&f, &phi, &x, b, 60, 60).unwrap();
        let mut acc = BallReal::zero();
        for leaf in &leaves {
            let y = leaf.point.point();
            let inner = ruelle_apply(&f, &phi, &u, &y, a, 50).unwrap();
            let term = &leaf.birkhoff.exp(60).unwrap() * &inner;
            acc = &acc + &term.mul_rational(&BigRational::from_integer(leaf.multiplicity.clone()), 60);
        }
        // leaf centers stand in for the tree's points; L^a u is Lipschitz, so allow 2^-30
        let gap = (&whole - &acc).abs();
        assert!(gap.lo() <= &(&whole.rad + &acc.rad) + &Dyadic::pow2(-30), "a = {a}, b = {b}: {whole} vs {acc}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_potentials_collapse(num in -20i64..20, den in 1i64..8, m in 0usize..6, re in -6i64..6, im in 1i64..6) {
        let f = map("z^2");
        let c = rat(num, den);
        let x = SpherePoint::finite(rat_int(re), rat_int(im));
        let v = ruelle_apply(&f, &Potential::constant(c.clone()), &Potential::constant(BigRational::one()), &x, m, 30).unwrap();
        let expect = 2f64.powi(m as i32) * (m as f64 * num as f64 / den as f64).exp();
        prop_assert!(near(&v, expect, 1e-12 * expect));
        if num == 0 {
            prop_assert!(v.contains_rational(&BigRational::from_integer(BigInt::one() << m)));
        }
    }

    #[test]
    fn constants_shift_pressure(num in -40i64..40, den in 1i64..9, which in 0usize..3) {
        let f = map(["z^2", "z^2-2", "z^2-1"][which]);
        let c = rat(num, den);
        let base = pressure(&f, &Potential::zero(), &certified()).unwrap().value;
        let shifted = pressure(&f, &Potential::constant(c.clone()), &certified()).unwrap().value;
        prop_assert!((&shifted - &base).contains_rational(&c));
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shifted_potentials_shift_empirical_pressure(num in -4i64..4) {
        let f = map("z^2");
        let phi = Potential::basis(pt(2, 0));
        let c = rat(num, 2);
        let a = pressure(&f, &phi, &PressureOptions::empirical(6)).unwrap();
        let b = pressure(&f, &phi.plus_constant(&c), &PressureOptions::empirical(6)).unwrap();
        prop_assert_eq!(a.n_used, b.n_used);
        prop_assert!((&b.value - &a.value).add_error(&Dyadic::pow2(-20)).contains_rational(&c));
    }
}
