//! Checks of the library against independent brute-force computations.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use slicekit::body::{hausdorff, Rep, SymBody};
use slicekit::directions::Direction;
use slicekit::ellipsoid::{
    containment_bounds, john, lowner, mvee_centered, Ellipsoid, MveeOptions, DEFAULT_EPS,
};
use slicekit::group::GroupElem;
use slicekit::random::{random_body, rng_from_seed};
use slicekit::slice::{john_position, lowner_position, slicing_map_john};

/// Vertices of `{x : |<a_i, x>| <= 1}` in the plane, by intersecting every
/// pair of boundary lines and keeping the feasible points.
fn planar_h_vertices(rows: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in rows.iter().skip(i + 1) {
            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let m = DMatrix::from_row_slice(2, 2, &[a[0], a[1], b[0], b[1]]);
                if m.determinant().abs() < 1e-12 {
                    continue;
                }
                let x = m.lu().solve(&DVector::from_vec(vec![sa, sb])).unwrap();
                if rows.iter().all(|r| r.dot(&x).abs() <= 1.0 + 1e-9) {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn unit(theta: f64) -> DVector<f64> {
    DVector::from_vec(vec![theta.cos(), theta.sin()])
}

#[test]
fn h_support_matches_vertex_enumeration() {
    let mut rng = rng_from_seed(1);
    for _ in 0..20 {
        let k = rng.random_range(2..7);
        let rows: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let Ok(body) = SymBody::new(2, Rep::H, rows.clone()) else {
            continue;
        };
        let verts = planar_h_vertices(&rows);
        for j in 0..64 {
            let u = unit(2.0 * PI * j as f64 / 64.0);
            let expected = verts.iter().map(|v| v.dot(&u)).fold(f64::MIN, f64::max);
            let got = body.support(&Direction::new(u).unwrap());
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }
}

#[test]
fn square_diagonal_support_and_cross_polytope_gauge() {
    let u = Direction::from_slice(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
    // vertex (1, 1) dotted with u
    let v = DVector::from_vec(vec![1.0, 1.0]);
    assert!((SymBody::cube(2).support(&u) - v.dot(u.as_vector())).abs() < 1e-15);
    assert!((SymBody::cube(2).support(&u) - SQRT_2).abs() < 1e-15);
    assert!((SymBody::cross_polytope(2).support(&u) - FRAC_1_SQRT_2).abs() < 1e-15);

    // the cross-polytope gauge is the l1 norm, in any dimension
    let mut rng = rng_from_seed(2);
    for n in 2..=4 {
        let c = SymBody::cross_polytope(n);
        for _ in 0..50 {
            let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let l1: f64 = x.iter().map(|t| t.abs()).sum();
            assert!((c.gauge(&x) - l1).abs() < 1e-12 * (1.0 + l1));
        }
    }
}

#[test]
fn rotated_square_support_by_transform() {
    let sq = SymBody::cube(2);
    for theta in [0.1, 0.7, 2.0] {
        let g = GroupElem::rotation2(theta);
        let moved = sq.act(&g);
        for j in 0..32 {
            let u = unit(0.3 + j as f64 * 0.2);
            let back = unit(0.3 + j as f64 * 0.2 - theta);
            // corners (±1, ±1) of the square, rotated back
            let expected = [(1.0, 1.0), (1.0, -1.0)]
                .iter()
                .map(|&(a, b)| (a * back[0] + b * back[1]).abs())
                .fold(0.0, f64::max);
            assert!((moved.support_raw(&u) - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn square_to_inscribed_disk_on_dense_grid() {
    let disk = SymBody::ball(2, 2048);
    // support of the square minus support of the disk, sampled very finely
    let dense = (0..200_000)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / 200_000.0;
            t.cos().abs() + t.sin().abs() - 1.0
        })
        .fold(0.0, f64::max);
    assert!((dense - (SQRT_2 - 1.0)).abs() < 1e-9);
    let d = hausdorff(&SymBody::cube(2), &disk, 4096).unwrap();
    // the polygonal disk sits inside the round one by at most 1 - cos(pi/4096)
    assert!((d - dense).abs() < 1e-6, "{d}");
}

#[test]
fn sampled_ball_polar_gauge() {
    let ball = SymBody::ball(2, 64);
    let p = ball.polar();
    for g in ball.gens() {
        let u = g / g.norm();
        assert!((p.gauge(&u) - 1.0).abs() < 1e-9);
    }
}

/// Textbook Khachiyan iteration on `±points`, without away steps.
fn khachiyan(points: &[DVector<f64>], tol: f64) -> (Vec<f64>, DMatrix<f64>) {
    let n = points[0].len();
    let k = points.len();
    let mut p = vec![1.0 / k as f64; k];
    loop {
        let mut lambda = DMatrix::zeros(n, n);
        for (x, w) in points.iter().zip(&p) {
            lambda += x * x.transpose() * *w;
        }
        let inv = lambda.clone().try_inverse().unwrap();
        let kappa: Vec<f64> = points.iter().map(|x| x.dot(&(&inv * x))).collect();
        let (j, &kmax) = kappa
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if kmax <= n as f64 * (1.0 + tol) {
            return (p, lambda);
        }
        let step = (kmax / n as f64 - 1.0) / (kmax - 1.0);
        for w in p.iter_mut() {
            *w *= 1.0 - step;
        }
        p[j] += step;
    }
}

#[test]
fn mvee_sits_between_khachiyan_bounds() {
    let mut rng = rng_from_seed(3);
    let n = 3;
    let points: Vec<DVector<f64>> = (0..50)
        .map(|_| DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let report = mvee_centered(&points, &MveeOptions::default()).unwrap();
    let m = report.ellipsoid.matrix();
    for x in &points {
        assert!(x.dot(&(m * x)) <= 1.0 + DEFAULT_EPS);
    }
    let (_, lambda) = khachiyan(&points, 1e-4);
    let inv = lambda.clone().try_inverse().unwrap();
    let kmax = points
        .iter()
        .map(|x| x.dot(&(&inv * x)))
        .fold(0.0, f64::max);
    // feasible ellipsoid from the oracle: lower bound on the optimal log det
    let lower = (inv / kmax).determinant().ln();
    // weak duality: log det M <= -log det(n Lambda(p)) for any weights p
    let upper = -(lambda * n as f64).determinant().ln();
    let ours = report.ellipsoid.log_det();
    assert!(lower <= ours + 1e-9, "{lower} {ours}");
    assert!(ours <= upper + 1e-9, "{ours} {upper}");
    // the oracle's own gap, so ours is pinned to within it
    assert!(upper - lower <= n as f64 * (1.0 + 1e-4f64).ln() + 1e-9);
}

/// `n x n` SPD matrix with eigenvalues in `[0.25, 4]`.
fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let o = GroupElem::random_orthogonal(rng, n);
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(0.25..4.0)));
    o.matrix() * d * o.matrix().transpose()
}

#[test]
fn ellipsoid_bodies_are_self_consistent() {
    let mut rng = rng_from_seed(4);
    for _ in 0..5 {
        let m = random_spd(&mut rng, 2);
        let e = Ellipsoid::new(m.clone()).unwrap();
        let body = e.to_body(2048);
        let l = lowner(&body, DEFAULT_EPS).unwrap();
        assert!((l.matrix() - &m).norm() < 1e-3 * m.norm());
        let j = john(&body, DEFAULT_EPS).unwrap();
        assert!((j.matrix() - &m).norm() < 1e-3 * m.norm());
    }
}

#[test]
fn cross_polytope_john_touches_boundary() {
    let c = SymBody::cross_polytope(2);
    let j = john(&c, DEFAULT_EPS).unwrap();
    assert!((j.matrix() - DMatrix::<f64>::identity(2, 2) * 2.0).norm() < 1e-6);
    // boundary containment: j(C) inside C, touching every edge
    for k in 0..360 {
        let u = unit(2.0 * PI * k as f64 / 360.0);
        let x = &u / j.quad(&u).sqrt();
        assert!(c.gauge(&x) <= 1.0 + 1e-6);
    }
    let edge_mid = DVector::from_vec(vec![0.5, 0.5]);
    assert!((j.quad(&edge_mid) - 1.0).abs() < 1e-6);
}

#[test]
fn john_position_vertex_norms() {
    let disk = SymBody::ball(2, 256);
    let cb = containment_bounds(&disk, DEFAULT_EPS).unwrap();
    assert!((cb.outer_factor - 1.0).abs() < 1e-3);

    let mut rng = rng_from_seed(5);
    for _ in 0..20 {
        let a = john_position(&random_body(&mut rng, 3), DEFAULT_EPS).unwrap();
        let largest = a.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(largest <= 3f64.sqrt() + 1e-6, "{largest}");
        let cb = containment_bounds(&a, DEFAULT_EPS).unwrap();
        assert!((cb.outer_factor - largest).abs() < 1e-5);
    }
}

#[test]
fn positions_of_simple_bodies() {
    let ellipse = SymBody::ellipse(&[2.0, 1.0], 1024);
    let p = slicing_map_john(&ellipse, DEFAULT_EPS).unwrap();
    let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
    assert!((p.matrix() - expected).norm() < 1e-3);
    let jp = john_position(&ellipse, DEFAULT_EPS).unwrap();
    let ball = SymBody::ball(2, 1024);
    assert!(hausdorff(&jp, &ball, 2048).unwrap() < 1e-3);

    // square / sqrt 2: its Löwner ellipsoid is the unit disk
    let lp = lowner_position(&SymBody::cube(2), DEFAULT_EPS).unwrap();
    let expected = SymBody::cube(2).act(&GroupElem::scaling(2, FRAC_1_SQRT_2).unwrap());
    assert!(hausdorff(&lp, &expected, 1024).unwrap() < 1e-6);
}
