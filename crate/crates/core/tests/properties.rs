use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use slicekit::body::{hausdorff, SymBody};
use slicekit::demo::{demo_act, demo_slicing_map, DemoGroupElem, DemoPoint, DemoSlice};
use slicekit::directions::DirectionGrid;
use slicekit::ellipsoid::{john, lowner, DEFAULT_EPS};
use slicekit::group::GroupElem;
use slicekit::orbit::{quotient_distance, OrbitSearchOptions};
use slicekit::random::{perturb, random_body, random_unit, rng_from_seed};
use slicekit::slice::{
    extend_equivariant, in_john_position, john_position, lowner_position, slicing_map_john,
    CongruenceAction, ExtensionOptions,
};

fn body(seed: u64, n: usize) -> SymBody {
    random_body(&mut rng_from_seed(seed), n)
}

fn gl(seed: u64, n: usize) -> GroupElem {
    GroupElem::random_gl(&mut rng_from_seed(seed ^ 0x9e37), n, 1.0)
}

fn rel_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn support_is_even_and_polar_is_bipolar(seed in any::<u64>(), n in 2usize..=4) {
        let a = body(seed, n);
        let p = a.polar();
        let mut rng = rng_from_seed(seed.wrapping_add(1));
        for _ in 0..16 {
            let u = random_unit(&mut rng, n);
            let h = a.support_raw(&u);
            prop_assert!((h - a.support_raw(&-&u)).abs() < 1e-12);
            prop_assert!((p.gauge(&u) - h).abs() < 1e-9 * (1.0 + h));
        }
        prop_assert_eq!(p.polar(), a);
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), n in 2usize..=4) {
        let a = body(seed, n);
        prop_assert_eq!(SymBody::from_json(&a.to_json()).unwrap(), a.clone());
        let p = a.polar();
        prop_assert_eq!(SymBody::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn support_transforms_by_transpose(seed in any::<u64>(), n in 2usize..=3) {
        let a = body(seed, n);
        let g = gl(seed, n);
        let ga = a.act(&g);
        let mut rng = rng_from_seed(seed.wrapping_add(2));
        for _ in 0..16 {
            let u = random_unit(&mut rng, n);
            let gtu = g.matrix().transpose() * &u;
            let expected = a.support_raw(&gtu);
            prop_assert!((ga.support_raw(&u) - expected).abs() < 1e-9 * (1.0 + expected));
        }
    }

    #[test]
    fn action_composes(seed in any::<u64>(), n in 2usize..=3) {
        let a = body(seed, n);
        let g = gl(seed, n);
        let h = gl(seed.wrapping_add(7), n);
        let lhs = a.act(&h).act(&g);
        let rhs = a.act(&g.compose(&h));
        prop_assert!(hausdorff(&lhs, &rhs, 512).unwrap() < 1e-9 * (1.0 + lhs.circumradius()));
    }

    #[test]
    fn hausdorff_is_a_metric(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let grid = DirectionGrid::new(2, 1024);
        let (a, b, c) = (body(s1, 2), body(s2, 2), body(s3, 2));
        let d = |x: &SymBody, y: &SymBody| slicekit::body::hausdorff_on(&grid, x, y);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn john_of_polar_is_inverse_lowner(seed in any::<u64>(), n in 2usize..=3) {
        let a = body(seed, n);
        let l = lowner(&a, DEFAULT_EPS).unwrap();
        let j = john(&a.polar(), DEFAULT_EPS).unwrap();
        let inv = l.matrix().clone().try_inverse().unwrap();
        prop_assert!(rel_close(j.matrix(), &inv, 1e-4));
    }

    #[test]
    fn john_position_sandwich_and_idempotence(seed in any::<u64>(), n in 2usize..=3) {
        let a = body(seed, n);
        let jp = john_position(&a, DEFAULT_EPS).unwrap();
        prop_assert!(jp.inradius() >= 1.0 - 1e-4);
        prop_assert!(jp.circumradius() <= (n as f64).sqrt() + 1e-4);
        prop_assert!(in_john_position(&jp, DEFAULT_EPS, 1e-6).unwrap());
        let again = slicing_map_john(&jp, DEFAULT_EPS).unwrap();
        prop_assert!(again.distance_to_identity() < 1e-5);

        let lp = lowner_position(&a, DEFAULT_EPS).unwrap();
        prop_assert!(lp.circumradius() <= 1.0 + 1e-4);
        prop_assert!(lp.inradius() >= 1.0 / (n as f64).sqrt() - 1e-4);
    }

    #[test]
    fn slicing_map_recovers_pd_factor(seed in any::<u64>(), n in 2usize..=3) {
        let s = john_position(&body(seed, n), DEFAULT_EPS).unwrap();
        let g = gl(seed, n);
        // P = sqrt(g g^T), so P^{-1} g is orthogonal and P S is in the orbit of g S
        let (p, _) = slicekit::slice::polar_decompose(&g);
        let q = p.inverse().to_group_elem().compose(&g);
        let moved = s.act(&q).act(&p.to_group_elem());
        let got = slicing_map_john(&moved, DEFAULT_EPS).unwrap();
        prop_assert!(rel_close(got.matrix(), p.matrix(), 1e-4));
    }

    #[test]
    fn extension_is_equivariant_and_restricts(seed in any::<u64>()) {
        let n = 2;
        let a = john_position(&body(seed, n), DEFAULT_EPS).unwrap();
        // second moment of the vertex set: O(n)-equivariant under congruence
        let f = |b: &SymBody| {
            let mut m = DMatrix::zeros(n, n);
            for v in b.vertices() {
                m += v * v.transpose();
            }
            Ok(DVector::from_column_slice(m.as_slice()))
        };
        let opts = ExtensionOptions::default();
        let on_slice = extend_equivariant(f, &CongruenceAction, &a, &opts).unwrap();
        let direct = f(&a).unwrap();
        prop_assert!((&on_slice - &direct).norm() < 1e-4 * (1.0 + direct.norm()));

        let g = gl(seed, n);
        let moved = extend_equivariant(f, &CongruenceAction, &a.act(&g), &opts).unwrap();
        let m = DMatrix::from_column_slice(n, n, on_slice.as_slice());
        let expected = g.matrix() * m * g.matrix().transpose();
        let got = DMatrix::from_column_slice(n, n, moved.as_slice());
        prop_assert!(rel_close(&got, &expected, 1e-4));
    }
}

proptest! {
    #[test]
    fn demo_maps_are_equivariant(
        x in -1e3f64..1e3,
        y in -1e3f64..1e3,
        lambda in 1e-3f64..1e3,
    ) {
        prop_assume!(x.abs() > 1e-6 && y.abs() > 1e-6);
        let p = DemoPoint::new(x, y).unwrap();
        let g = DemoGroupElem::new(lambda).unwrap();
        let q = demo_act(g, p);
        for s in [DemoSlice::Circle, DemoSlice::Hyperbola] {
            let f = demo_slicing_map(s, &p);
            let fq = demo_slicing_map(s, &q);
            prop_assert!((fq - lambda * f).abs() <= 1e-12 * fq.abs().max(1.0));
            // the point divided by f lands on the slice
            let r = demo_act(DemoGroupElem::new(f).unwrap().inverse(), p);
            prop_assert!(s.contains(&r, 1e-9));
        }
    }

    #[test]
    fn circle_map_is_one_lipschitz(
        a in (-10f64..10.0, -10f64..10.0),
        b in (-10f64..10.0, -10f64..10.0),
    ) {
        prop_assume!(a.0.hypot(a.1) > 1e-6 && b.0.hypot(b.1) > 1e-6);
        let p = DemoPoint::new(a.0, a.1).unwrap();
        let q = DemoPoint::new(b.0, b.1).unwrap();
        let fp = demo_slicing_map(DemoSlice::Circle, &p);
        let fq = demo_slicing_map(DemoSlice::Circle, &q);
        prop_assert!((fp - fq).abs() <= p.dist(&q) + 1e-12);
    }
}

#[test]
fn slicing_map_error_shrinks_with_perturbation() {
    let mut rng = rng_from_seed(11);
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
    let total = 40;
    let mut monotone = 0;
    for _ in 0..total {
        let a = random_body(&mut rng, 2);
        let p = slicing_map_john(&a, DEFAULT_EPS).unwrap();
        let errs: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                let b = perturb(&mut rng, &a, d * a.inradius());
                (slicing_map_john(&b, DEFAULT_EPS).unwrap().matrix() - p.matrix()).norm()
            })
            .collect();
        if errs.windows(2).all(|w| w[1] <= w[0]) {
            monotone += 1;
        }
    }
    assert!(monotone * 100 >= 95 * total, "{monotone}/{total}");
}

#[test]
fn quotient_distance_is_a_pseudometric() {
    let opts = OrbitSearchOptions::default();
    let bodies: Vec<SymBody> = (0..4).map(|s| body(100 + s, 2)).collect();
    let mut d = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            d[i][j] = quotient_distance(&bodies[i], &bodies[j], &opts).unwrap();
        }
    }
    for i in 0..4 {
        assert_eq!(d[i][i], 0.0);
        for j in 0..4 {
            assert!((d[i][j] - d[j][i]).abs() < 1e-6, "{:?}", d);
            for k in 0..4 {
                assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-6);
            }
        }
    }
    // distinct representatives of one orbit are at distance zero
    let g = gl(5, 2);
    let moved = bodies[0].act(&g);
    assert!(quotient_distance(&bodies[0], &moved, &opts).unwrap() < 1e-4);
}
