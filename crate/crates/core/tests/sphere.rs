use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use equistate::numerics::{rat, BallReal, Dyadic};
use equistate::sphere::{
    chordal_distance, chordal_sq, ideal_enumerate, ideal_enumerate_big, ideal_index, oracle_of, PointOracle, SpherePoint,
};

fn pt(re: i64, im: i64) -> SpherePoint {
    SpherePoint::finite(rat(re, 1), rat(im, 1))
}

/// `sigma(z, w)^2` straight from `4|z - w|^2 / ((1 + |z|^2)(1 + |w|^2))`.
fn chordal_sq_oracle(z: &SpherePoint, w: &SpherePoint) -> BigRational {
    let four = BigRational::from_integer(4.into());
    match (z, w) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => BigRational::zero(),
        (SpherePoint::Infinity, SpherePoint::Finite(a)) | (SpherePoint::Finite(a), SpherePoint::Infinity) => {
            four / (BigRational::one() + a.norm_sqr())
        }
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            let dr = &a.re - &b.re;
            let di = &a.im - &b.im;
            four * (&dr * &dr + &di * &di) / ((BigRational::one() + a.norm_sqr()) * (BigRational::one() + b.norm_sqr()))
        }
    }
}

#[test]
fn chordal_examples() {
    let d = chordal_distance(&pt(0, 0), &SpherePoint::Infinity, 40);
    assert!(d.is_exact() && d.contains_rational(&rat(2, 1)));
    let d = chordal_distance(&pt(1, 0), &pt(-1, 0), 40);
    assert!(d.is_exact() && d.contains_rational(&rat(2, 1)));
    let d = chordal_distance(&pt(0, 0), &pt(1, 0), 40);
    assert!(d.square().contains_rational(&rat(2, 1)));
    assert!((d.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn enumeration_starts_at_zero() {
    assert_eq!(ideal_enumerate(1), pt(0, 0));
}

#[test]
fn exact_oracles() {
    let p = SpherePoint::finite(rat(1, 1), rat(1, 1));
    for n in [0, 5, 40] {
        assert_eq!(oracle_of(&p).query(n), p);
    }
    for n in [0u32, 3, 10, 30] {
        let t = oracle_of(&SpherePoint::Infinity).query(n);
        let bound = BigRational::new(BigInt::one(), BigInt::one() << (2 * n as usize));
        assert!(chordal_sq(&t, &SpherePoint::Infinity) < bound);
    }
}

fn arb_point() -> impl Strategy<Value = SpherePoint> {
    prop_oneof![
        1 => Just(SpherePoint::Infinity),
        12 => (-60i64..60, 1i64..20, -60i64..60, 1i64..20).prop_map(|(a, b, c, d)| SpherePoint::finite(rat(a, b), rat(c, d))),
    ]
}

proptest! {
    #[test]
    fn squared_distance_matches_formula(z in arb_point(), w in arb_point()) {
        prop_assert_eq!(chordal_sq(&z, &w), chordal_sq_oracle(&z, &w));
    }

    #[test]
    fn metric_axioms(x in arb_point(), y in arb_point(), z in arb_point()) {
        let dxy = chordal_distance(&x, &y, 60);
        let dyx = chordal_distance(&y, &x, 60);
        prop_assert_eq!(&dxy, &dyx);
        let dxz = chordal_distance(&x, &z, 60);
        let dzy = chordal_distance(&z, &y, 60);
        let sum = &dxz + &dzy;
        prop_assert!(dxy.lo() <= sum.hi());
        prop_assert!(Dyadic::zero() <= dxy.hi());
        prop_assert!(dxy.lo() <= Dyadic::from_int(2));
        prop_assert!(dxy.rad <= Dyadic::pow2(-60));
        if x == y {
            prop_assert!(dxy.contains(&Dyadic::zero()));
        }
    }

    #[test]
    fn index_round_trips(k in 1u64..2_000_000) {
        let p = ideal_enumerate(k);
        prop_assert_eq!(ideal_index(&p), Some(BigInt::from(k)));
    }

    /// Every exact point has enumerated points within `2^-n`: the dyadic grid point
    /// nearest to it (or a large real for infinity) is found at a computable index.
    #[test]
    fn ideal_points_are_dense(p in arb_point(), n in 0u32..=20) {
        let grid = |q: &BigRational| {
            let s = BigInt::one() << (n as usize + 3);
            BigRational::new((q * BigRational::from_integer(s.clone())).round().to_integer(), s)
        };
        let approx = match &p {
            SpherePoint::Infinity => oracle_of(&p).query(n + 1),
            SpherePoint::Finite(z) => SpherePoint::finite(grid(&z.re), grid(&z.im)),
        };
        let k = ideal_index(&approx).expect("finite");
        prop_assert_eq!(ideal_enumerate_big(&k), approx.clone());
        let d = chordal_distance(&approx, &p, 40);
        prop_assert!(d.hi() < Dyadic::pow2(-(n as i64)), "{} at distance {}", approx, d);
    }

    #[test]
    fn exact_distance_balls_are_tight(z in arb_point(), w in arb_point(), prec in 10i64..90) {
        let d: BallReal = chordal_distance(&z, &w, prec);
        prop_assert!(d.rad <= Dyadic::pow2(-prec));
        prop_assert!(d.square().contains_rational(&chordal_sq_oracle(&z, &w)));
    }
}
