use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use equistate::measure::{wasserstein, FiniteMeasure};
use equistate::numerics::{rat, Dyadic};
use equistate::thurston::{
    flower, max_tile_diameter, mme_tile_measure, Face, RuleName, SubdivisionMap, TileComplex, TilePoint,
};
use equistate::Error;

fn g1() -> SubdivisionMap {
    SubdivisionMap::get(RuleName::G1)
}

fn g2() -> SubdivisionMap {
    SubdivisionMap::get(RuleName::G2)
}

#[test]
fn tile_counts() {
    let (a, b) = (g1(), g2());
    assert_eq!((a.degree(), b.degree()), (6, 8));
    assert_eq!(TileComplex::build(&a, 0).len(), 2);
    assert_eq!(TileComplex::build(&a, 1).len(), 12);
    assert_eq!(TileComplex::build(&a, 2).len(), 72);
    assert_eq!(TileComplex::build(&b, 1).len(), 16);
    assert_eq!(TileComplex::build(&b, 2).len(), 128);
}

#[test]
fn built_in_rules_validate() {
    assert!(g1().validate().is_ok());
    assert!(g2().validate().is_ok());
}

#[test]
fn tiles_map_onto_coarser_tiles() {
    for g in [g1(), g2()] {
        let coarse = TileComplex::build(&g, 1);
        let fine = TileComplex::build(&g, 2);
        for t in &fine.tiles {
            let parent = &coarse.tiles[t.image.expect("level 2 tiles have images")];
            let mut img: Vec<TilePoint> = t.verts.iter().map(|v| g.eval(v)).collect();
            let mut want = parent.verts.to_vec();
            img.sort();
            want.sort();
            assert_eq!(img, want);
            let container = &coarse.tiles[t.container.expect("level 2 tiles have containers")];
            assert_eq!(container.face, t.face);
        }
    }
}

#[test]
fn corners_go_to_corners() {
    let corners: Vec<TilePoint> = (0..3).map(TilePoint::corner).collect();
    for g in [g1(), g2()] {
        for v in g.vertices() {
            assert!(corners.contains(&g.eval(&v)), "{v:?}");
        }
        let post = g.postcritical_set();
        assert!(post.iter().all(|p| corners.contains(p)));
    }
}

#[test]
fn barycenters_of_one_tiles_map_to_face_barycenters() {
    for g in [g1(), g2()] {
        let c = TileComplex::build(&g, 1);
        for t in &c.tiles {
            let third = BigRational::new(1.into(), 3.into());
            let b: [BigRational; 3] =
                std::array::from_fn(|i| (&t.verts[0].bary()[i] + &t.verts[1].bary()[i] + &t.verts[2].bary()[i]) * &third);
            let p = TilePoint::new(t.face, b).unwrap();
            assert_eq!(g.eval(&p), TilePoint::barycenter(t.target));
        }
    }
}

#[test]
fn local_degrees_at_preimages_of_corners() {
    for g in [g1(), g2()] {
        for k in 0..3 {
            let pre = g.preimages(&TilePoint::corner(k));
            let total: usize = pre.iter().map(|p| g.local_degree(p)).sum();
            assert_eq!(total, g.degree(), "corner {k}");
        }
    }
}

#[test]
fn tile_measure_examples() {
    let half = rat(1, 2);
    let m0 = mme_tile_measure(&g1(), 0);
    assert_eq!(m0.weight_of(&TilePoint::barycenter(Face::Front)), half);
    assert_eq!(m0.weight_of(&TilePoint::barycenter(Face::Back)), half);

    let m1 = mme_tile_measure(&g1(), 1);
    assert_eq!(m1.len(), 12);
    assert!(m1.atoms().iter().all(|(_, w)| *w == rat(1, 12)));

    let m2 = mme_tile_measure(&g2(), 2);
    assert_eq!(m2.len(), 128);
    assert!(m2.is_probability());
}

#[test]
fn flower_examples() {
    let g = g1();
    let c = TileComplex::build(&g, 1);
    let a = TilePoint::corner(0);
    let ids = flower(&c, &a).unwrap();
    assert_eq!(ids.len(), 2 * g.local_degree(&a));
    assert!(ids.iter().all(|&i| c.tiles[i].verts.contains(&a)));

    let mid = TilePoint::barycenter(Face::Front);
    assert_eq!(flower(&c, &mid).unwrap().len(), 6);
    let off = TilePoint::new(Face::Front, [rat(1, 7), rat(2, 7), rat(4, 7)]).unwrap();
    assert_eq!(flower(&c, &off), Err(Error::NotAVertex));
}

#[test]
fn diameters_start_at_one_and_shrink() {
    for g in [g1(), g2()] {
        let d: Vec<_> = (0..=4).map(|n| max_tile_diameter(&TileComplex::build(&g, n), 40)).collect();
        assert!(d[0].contains(&Dyadic::one()));
        for w in d.windows(2) {
            assert!(w[1].hi() < w[0].lo());
        }
    }
}

#[test]
fn consecutive_levels_are_within_one_tile() {
    for (g, top) in [(g1(), 2), (g2(), 2)] {
        for n in 0..top {
            let a = mme_tile_measure(&g, n);
            let b = mme_tile_measure(&g, n + 1);
            let w = wasserstein(&a, &b, 40).unwrap();
            let diam = max_tile_diameter(&TileComplex::build(&g, n), 40);
            assert!(w.value.lo() <= diam.hi(), "level {n}: {} vs {}", w.value, diam);
        }
    }
}

#[test]
fn tile_measures_have_exact_unit_mass() {
    for g in [g1(), g2()] {
        for n in 0..=3 {
            let mu: FiniteMeasure<TilePoint> = mme_tile_measure(&g, n);
            assert!(mu.is_probability());
            assert!(mu.displacement().is_zero());
            let expect = BigRational::new(1.into(), (2 * g.degree().pow(n as u32)).into());
            assert!(mu.atoms().iter().all(|(_, w)| *w == expect));
        }
    }
}

fn arb_tile_point() -> impl Strategy<Value = TilePoint> {
    (0u32..60, 0u32..60, 1u32..60, any::<bool>()).prop_map(|(a, b, c, back)| {
        let s = (a + b + c) as i64;
        let face = if back { Face::Back } else { Face::Front };
        TilePoint::new(face, [rat(a as i64, s), rat(b as i64, s), rat(c as i64, s)]).unwrap()
    })
}

proptest! {
    #[test]
    fn preimages_map_back_exactly(x in arb_tile_point(), which in 0usize..2) {
        let g = [g1(), g2()][which].clone();
        let pre = g.preimages(&x);
        prop_assert!(!pre.is_empty() && pre.len() <= g.degree());
        for y in &pre {
            prop_assert_eq!(g.eval(y), x.clone());
        }
        let total: usize = pre.iter().map(|p| g.local_degree(p)).sum();
        prop_assert_eq!(total, g.degree());
    }

    #[test]
    fn eval_stays_in_the_triangle(x in arb_tile_point(), which in 0usize..2) {
        let g = [g1(), g2()][which].clone();
        let y = g.eval(&x);
        prop_assert!(y.bary().iter().all(|c| *c >= BigRational::zero() && *c <= BigRational::one()));
    }
}
