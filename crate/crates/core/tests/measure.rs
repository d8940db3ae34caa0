use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use equistate::measure::{
    compare_ge, integrate, pinned_cost, pushforward, wasserstein, AnyMeasure, Comparison, FiniteMeasure, Hat,
    MetricPoint, COST_SCALE_LOG2,
};
use equistate::numerics::{rat, BallReal, Dyadic};
use equistate::ratmap::RationalMap;
use equistate::sphere::{chordal_distance, SpherePoint};
use equistate::Error;

fn pt(re: i64, im: i64) -> SpherePoint {
    SpherePoint::finite(rat(re, 1), rat(im, 1))
}

fn half() -> BigRational {
    rat(1, 2)
}

/// Chordal distance in floating point, straight from the formula.
fn sigma_f64(z: &SpherePoint, w: &SpherePoint) -> f64 {
    let f = |p: &SpherePoint| p.as_finite().map(|g| g.to_f64());
    match (f(z), f(w)) {
        (None, None) => 0.0,
        (Some((a, b)), None) | (None, Some((a, b))) => 2.0 / (1.0 + a * a + b * b).sqrt(),
        (Some((a, b)), Some((c, d))) => {
            2.0 * ((a - c).powi(2) + (b - d).powi(2)).sqrt() / ((1.0 + a * a + b * b) * (1.0 + c * c + d * d)).sqrt()
        }
    }
}

#[test]
fn integrate_examples() {
    let origin = pt(0, 0);
    let d0 = FiniteMeasure::dirac(origin.clone());
    assert!(integrate(&d0, |x| chordal_distance(x, &origin, 40), 40).contains_rational(&BigRational::zero()));

    let mu = FiniteMeasure::new(vec![(pt(0, 0), half()), (pt(1, 0), half())]).unwrap();
    let v = integrate(&mu, |x| chordal_distance(x, &origin, 50), 40);
    assert!((v.to_f64() - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-12);
    assert!(v.rad <= Dyadic::pow2(-39));

    let c = rat(7, 3);
    let w = integrate(&mu, |_| BallReal::from_rational(&c, 60), 40);
    assert!(w.contains_rational(&c));
}

#[test]
fn pushforward_examples() {
    let f: RationalMap = "z^2".parse().unwrap();
    let sq = |x: &SpherePoint| Some(f.apply(x));
    let one = FiniteMeasure::dirac(pt(1, 0));
    assert_eq!(pushforward(&one, sq).unwrap(), one);

    let pair = FiniteMeasure::uniform(vec![pt(1, 0), pt(-1, 0)]).unwrap();
    assert_eq!(pushforward(&pair, sq).unwrap(), one);

    let four = FiniteMeasure::uniform(vec![pt(1, 0), pt(-1, 0), pt(0, 1), pt(0, -1)]).unwrap();
    assert_eq!(pushforward(&four, sq).unwrap(), pair);

    assert!(matches!(pushforward(&one, |_: &SpherePoint| None::<SpherePoint>), Err(Error::InexactImage)));
}

#[test]
fn wasserstein_examples() {
    let d0 = FiniteMeasure::dirac(pt(0, 0));
    let d1 = FiniteMeasure::dirac(pt(1, 0));
    let w = wasserstein(&d0, &d0, 40).unwrap();
    assert!(w.value.contains_rational(&BigRational::zero()));

    let w = wasserstein(&d0, &d1, 40).unwrap();
    assert!(w.value.overlaps(&chordal_distance(&pt(0, 0), &pt(1, 0), 60)));

    let split = FiniteMeasure::uniform(vec![pt(0, 0), pt(1, 0)]).unwrap();
    let w = wasserstein(&split, &d0, 40).unwrap();
    assert!((w.value.to_f64() - std::f64::consts::SQRT_2 / 2.0).abs() <= w.value.rad.to_f64() + 1e-15);

    // the 2x2 transport polytope has two vertices: keep or swap the pairing
    let (a, b, c, d) = (pt(0, 0), pt(2, 0), pt(1, 0), pt(-1, 0));
    let mu = FiniteMeasure::uniform(vec![a.clone(), b.clone()]).unwrap();
    let nu = FiniteMeasure::uniform(vec![c.clone(), d.clone()]).unwrap();
    let keep = (sigma_f64(&a, &c) + sigma_f64(&b, &d)) / 2.0;
    let swap = (sigma_f64(&a, &d) + sigma_f64(&b, &c)) / 2.0;
    let w = wasserstein(&mu, &nu, 40).unwrap();
    assert!((w.value.to_f64() - keep.min(swap)).abs() <= w.value.rad.to_f64() + 1e-14);
}

#[test]
fn wasserstein_rejects_mass_mismatch() {
    let a = FiniteMeasure::dirac(pt(0, 0));
    let b = FiniteMeasure::sub(vec![(pt(0, 0), half())]).unwrap();
    assert!(matches!(wasserstein(&a, &b, 40), Err(Error::MassMismatch)));
}

#[test]
fn compare_ge_examples() {
    let hats: Vec<Hat<SpherePoint>> = [pt(0, 0), pt(1, 0), SpherePoint::Infinity]
        .into_iter()
        .map(|c| Hat::new(c, rat(0, 1), rat(1, 4)))
        .collect();
    let tol = rat(1, 1024);
    let mu = FiniteMeasure::uniform(vec![pt(0, 0), pt(3, 1)]).unwrap();
    assert!(compare_ge(&mu, &mu, &hats, &tol, 30).holds());

    let d0 = FiniteMeasure::dirac(pt(0, 0));
    let half0 = FiniteMeasure::sub(vec![(pt(0, 0), half())]).unwrap();
    assert!(compare_ge(&d0, &half0, &hats, &tol, 30).holds());

    let d1 = FiniteMeasure::dirac(pt(1, 0));
    let at_one = [Hat::new(pt(1, 0), rat(0, 1), rat(1, 4))];
    match compare_ge(&d0, &d1, &at_one, &tol, 30) {
        Comparison::Violated { index, mu_integral, nu_integral, .. } => {
            assert_eq!(index, 0);
            assert!(mu_integral.contains_rational(&BigRational::zero()));
            assert!(nu_integral.contains_rational(&BigRational::one()));
        }
        Comparison::Holds => panic!("separated supports must be detected"),
    }
}

#[test]
fn json_round_trip() {
    let mu = FiniteMeasure::new(vec![(pt(0, 0), rat(1, 3)), (SpherePoint::Infinity, rat(2, 3))])
        .unwrap()
        .with_displacement(Dyadic::pow2(-20));
    let back = AnyMeasure::from_json(&mu.to_json()).unwrap();
    match back {
        AnyMeasure::Sphere(m) => assert_eq!(m, mu),
        AnyMeasure::Tri(_) => panic!("wrong space"),
    }
}

fn arb_point() -> impl Strategy<Value = SpherePoint> {
    prop_oneof![
        1 => Just(SpherePoint::Infinity),
        15 => (-30i64..30, 1i64..8, -30i64..30, 1i64..8).prop_map(|(a, b, c, d)| SpherePoint::finite(rat(a, b), rat(c, d))),
    ]
}

fn arb_measure(max: usize) -> impl Strategy<Value = FiniteMeasure<SpherePoint>> {
    prop::collection::vec((arb_point(), 1i64..6), 1..=max).prop_filter_map("distinct atoms", |atoms| {
        let total: i64 = atoms.iter().map(|(_, w)| w).sum();
        FiniteMeasure::new(atoms.into_iter().map(|(p, w)| (p, rat(w, total))).collect()).ok()
    })
}

fn arb_uniform(n: usize) -> impl Strategy<Value = FiniteMeasure<SpherePoint>> {
    prop::collection::vec(arb_point(), n).prop_filter_map("distinct atoms", |pts| FiniteMeasure::uniform(pts).ok())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    permutations(n - 1)
        .into_iter()
        .flat_map(|p| {
            (0..=p.len()).map(move |i| {
                let mut q = p.clone();
                q.insert(i, n - 1);
                q
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn plan_is_feasible_and_priced(mu in arb_measure(5), nu in arb_measure(5)) {
        let r = wasserstein(&mu, &nu, 40).unwrap();
        prop_assert!(r.certified);
        let mut out = vec![BigRational::zero(); mu.len()];
        let mut inn = vec![BigRational::zero(); nu.len()];
        let mut cost = BigRational::zero();
        for (i, j, m) in &r.plan {
            out[*i] += m;
            inn[*j] += m;
            let c = pinned_cost::<SpherePoint>(&mu.atoms()[*i].0.embed(), &nu.atoms()[*j].0.embed());
            cost += m * BigRational::new(BigInt::from(c), BigInt::one() << COST_SCALE_LOG2 as usize);
        }
        for (k, (_, w)) in mu.atoms().iter().enumerate() {
            prop_assert_eq!(&out[k], w);
        }
        for (k, (_, w)) in nu.atoms().iter().enumerate() {
            prop_assert_eq!(&inn[k], w);
        }
        prop_assert_eq!(cost, r.pinned_value);
    }

    #[test]
    fn wasserstein_is_a_metric(a in arb_measure(5), b in arb_measure(5), c in arb_measure(5)) {
        let ab = wasserstein(&a, &b, 40).unwrap().value;
        let ba = wasserstein(&b, &a, 40).unwrap().value;
        let bc = wasserstein(&b, &c, 40).unwrap().value;
        let ac = wasserstein(&a, &c, 40).unwrap().value;
        prop_assert!(ab.overlaps(&ba));
        prop_assert!((ab.mid.to_f64() - ba.mid.to_f64()).abs() <= 2.0 * ab.rad.to_f64());
        let sum = &ab + &bc;
        prop_assert!(ac.lo() <= sum.hi());
        prop_assert!(ab.lo() <= Dyadic::from_int(2));
        prop_assert!(wasserstein(&a, &a, 40).unwrap().value.contains(&Dyadic::zero()));
    }

    #[test]
    fn matches_brute_force_assignment(n in 1usize..=4, seed in any::<u64>()) {
        let pts: Vec<SpherePoint> = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..2 * n).map(|_| SpherePoint::finite(rat(rng.gen_range(-20..20), rng.gen_range(1..6)), rat(rng.gen_range(-20..20), rng.gen_range(1..6)))).collect()
        };
        let (Ok(mu), Ok(nu)) = (FiniteMeasure::uniform(pts[..n].to_vec()), FiniteMeasure::uniform(pts[n..].to_vec())) else {
            return Ok(());
        };
        let costs: Vec<Vec<i64>> = mu.atoms().iter().map(|(x, _)| nu.atoms().iter().map(|(y, _)| pinned_cost::<SpherePoint>(&x.embed(), &y.embed())).collect()).collect();
        let best = permutations(n).iter().map(|p| p.iter().enumerate().map(|(i, &j)| costs[i][j] as i128).sum::<i128>()).min().unwrap();
        let expect = BigRational::new(BigInt::from(best), BigInt::from(n) << COST_SCALE_LOG2 as usize);
        prop_assert_eq!(wasserstein(&mu, &nu, 40).unwrap().pinned_value, expect);
    }

    #[test]
    fn dirac_distance_is_chordal(x in arb_point(), y in arb_point()) {
        let w = wasserstein(&FiniteMeasure::dirac(x.clone()), &FiniteMeasure::dirac(y.clone()), 40).unwrap();
        prop_assert!((w.value.to_f64() - sigma_f64(&x, &y)).abs() <= w.value.rad.to_f64() + 1e-13);
    }

    #[test]
    fn uniform_measures_are_probabilities(m in arb_uniform(4)) {
        prop_assert!(m.is_probability());
        prop_assert_eq!(m.total_mass().to_f64().unwrap(), 1.0);
    }
}
