//! Origin-symmetric convex polytopes in vertex (`V`) or facet (`H`) form.
//!
//! A `V` body with generators `g_1..g_k` is `conv{±g_i}`; an `H` body with the
//! same generators is `{x : |<g_i, x>| <= 1}`. The two are polar to each other,
//! so `polar` only flips the tag. Everything that needs the "other" description
//! (support of an `H` body, gauge of a `V` body) goes through the dual
//! generator list, which is enumerated once per body and cached.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::directions::{Direction, DirectionGrid, DEFAULT_DIRECTIONS};
use crate::error::{GeomError, Result};
use crate::group::GroupElem;
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rep {
    V,
    H,
}

impl Rep {
    pub fn flip(self) -> Rep {
        match self {
            Rep::V => Rep::H,
            Rep::H => Rep::V,
        }
    }
}

/// Origin-symmetric full-dimensional convex body, stored as a polytope.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BodyJson", into = "BodyJson")]
pub struct SymBody {
    n: usize,
    rep: Rep,
    gens: Vec<DVector<f64>>,
    dual: OnceLock<Vec<DVector<f64>>>,
}

impl PartialEq for SymBody {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rep == other.rep && self.gens == other.gens
    }
}

/// Wire format: `{"n": int, "rep": "V"|"H", "gens": [[f64, ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BodyJson {
    pub n: usize,
    pub rep: Rep,
    pub gens: Vec<Vec<f64>>,
}

impl TryFrom<BodyJson> for SymBody {
    type Error = GeomError;

    fn try_from(value: BodyJson) -> Result<Self> {
        let gens = value
            .gens
            .iter()
            .map(|g| {
                if g.len() != value.n {
                    Err(GeomError::DimensionMismatch {
                        expected: value.n,
                        got: g.len(),
                    })
                } else {
                    Ok(DVector::from_column_slice(g))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        SymBody::new(value.n, value.rep, gens)
    }
}

impl From<SymBody> for BodyJson {
    fn from(b: SymBody) -> Self {
        BodyJson {
            n: b.n,
            rep: b.rep,
            gens: b.gens.iter().map(|g| g.iter().copied().collect()).collect(),
        }
    }
}

impl SymBody {
    /// Validates and builds a body. Rejects zero generators and generator sets
    /// that do not span `R^n`.
    pub fn new(n: usize, rep: Rep, gens: Vec<DVector<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(GeomError::InvalidParameter("dimension must be >= 1".into()));
        }
        for (index, g) in gens.iter().enumerate() {
            if g.len() != n {
                return Err(GeomError::DimensionMismatch {
                    expected: n,
                    got: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(GeomError::InvalidParameter(format!(
                    "generator {index} has a non-finite entry"
                )));
            }
            if g.iter().all(|&x| x == 0.0) {
                return Err(GeomError::ZeroGenerator { index });
            }
        }
        let rank = linalg::rank_of_rows(&gens, n);
        if gens.len() < n || rank < n {
            return Err(GeomError::NotFullDimensional { n, rank });
        }
        Ok(SymBody {
            n,
            rep,
            gens,
            dual: OnceLock::new(),
        })
    }

    pub fn from_rows(rep: Rep, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        SymBody::try_from(BodyJson {
            n,
            rep,
            gens: rows.to_vec(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("body serializes")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn gens(&self) -> &[DVector<f64>] {
        &self.gens
    }

    /// Generators of the polar description: facet normals of a `V` body, or
    /// vertices of an `H` body. One representative per `±` pair.
    pub fn dual_gens(&self) -> &[DVector<f64>] {
        self.dual
            .get_or_init(|| dual_generators(&self.gens, self.n))
            .as_slice()
    }

    /// Points whose symmetric convex hull is the body.
    pub fn vertices(&self) -> &[DVector<f64>] {
        match self.rep {
            Rep::V => &self.gens,
            Rep::H => self.dual_gens(),
        }
    }

    /// Functionals `a` with body `= {x : |<a, x>| <= 1}`.
    pub fn facets(&self) -> &[DVector<f64>] {
        match self.rep {
            Rep::V => self.dual_gens(),
            Rep::H => &self.gens,
        }
    }

    /// Support function `h_A(u) = max_{a in A} <a, u>`.
    pub fn support(&self, u: &Direction) -> f64 {
        self.support_raw(u.as_vector())
    }

    /// Support function evaluated at an arbitrary (not necessarily unit)
    /// vector; positively homogeneous.
    pub fn support_raw(&self, x: &DVector<f64>) -> f64 {
        max_abs_dot(self.vertices(), x)
    }

    /// Minkowski functional `inf{t > 0 : x in tA}`.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        max_abs_dot(self.facets(), x)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.gauge(x) <= 1.0 + tol
    }

    /// Polar body; keeps the generators and flips the tag.
    pub fn polar(&self) -> SymBody {
        let dual = self.dual.clone();
        SymBody {
            n: self.n,
            rep: self.rep.flip(),
            gens: self.gens.clone(),
            dual,
        }
    }

    /// Linear image `gA`.
    pub fn act(&self, g: &GroupElem) -> SymBody {
        assert_eq!(g.dim(), self.n, "group element dimension mismatch");
        let gm = g.matrix();
        let git = g.inverse_transpose();
        let (gens_map, dual_map) = match self.rep {
            Rep::V => (gm, &git),
            Rep::H => (&git, gm),
        };
        let gens = self.gens.iter().map(|v| gens_map * v).collect();
        let dual = OnceLock::new();
        if let Some(d) = self.dual.get() {
            let _ = dual.set(d.iter().map(|v| dual_map * v).collect());
        }
        SymBody {
            n: self.n,
            rep: self.rep,
            gens,
            dual,
        }
    }

    /// Same body with the alternative representation.
    pub fn to_rep(&self, rep: Rep) -> SymBody {
        if rep == self.rep {
            return self.clone();
        }
        let dual = OnceLock::new();
        let _ = dual.set(self.gens.clone());
        SymBody {
            n: self.n,
            rep,
            gens: self.dual_gens().to_vec(),
            dual,
        }
    }

    /// Largest Euclidean norm of a point of the body.
    pub fn circumradius(&self) -> f64 {
        self.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `r` with `r B^n` inside the body.
    pub fn inradius(&self) -> f64 {
        let m = self.facets().iter().map(|a| a.norm()).fold(0.0, f64::max);
        1.0 / m
    }

    /// Cube `[-1, 1]^n` in H form.
    pub fn cube(n: usize) -> SymBody {
        SymBody::new(n, Rep::H, unit_vectors(n)).expect("cube is a body")
    }

    /// Cross-polytope `conv{±e_i}` in V form.
    pub fn cross_polytope(n: usize) -> SymBody {
        SymBody::new(n, Rep::V, unit_vectors(n)).expect("cross-polytope is a body")
    }

    /// Polytope inscribed in the unit ball with `m` generators (a regular
    /// `2m`-gon in the plane).
    pub fn ball(n: usize, m: usize) -> SymBody {
        let gens: Vec<DVector<f64>> = if n == 2 {
            (0..m)
                .map(|j| {
                    let t = std::f64::consts::PI * j as f64 / m as f64;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                })
                .collect()
        } else {
            DirectionGrid::new(n, m).directions().to_vec()
        };
        SymBody::new(n, Rep::V, gens).expect("ball sample is a body")
    }

    /// `V` sample of the ellipsoid with the given semi-axes along the
    /// coordinate axes.
    pub fn ellipse(axes: &[f64], m: usize) -> SymBody {
        let d = GroupElem::diagonal(axes).expect("positive semi-axes");
        SymBody::ball(axes.len(), m).act(&d)
    }
}

fn unit_vectors(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect()
}

fn max_abs_dot(rows: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    rows.iter().map(|r| r.dot(x).abs()).fold(0.0, f64::max)
}

/// Facet functionals of `conv{±gens}`, one per `±` pair, normalized so the
/// facet is `<a, x> = 1`. Applied to `H` generators this yields the vertices.
pub fn dual_generators(gens: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let scale = gens.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut out: Vec<DVector<f64>> = Vec::new();
    match n {
        1 => {
            out.push(DVector::from_element(1, 1.0 / scale));
        }
        2 => {
            let hull = symmetric_hull_2d(gens);
            let h = hull.len();
            for i in 0..h {
                let a = &hull[i];
                let b = &hull[(i + 1) % h];
                let m = DMatrix::from_row_slice(2, 2, &[a[0], a[1], b[0], b[1]]);
                if let Some(c) = m.lu().solve(&DVector::from_element(2, 1.0)) {
                    push_unique(&mut out, c);
                }
            }
        }
        _ => {
            let k = gens.len();
            let tol = 1e-9;
            let mut idx: Vec<usize> = (0..n).collect();
            loop {
                for signs in 0..(1usize << (n - 1)) {
                    let rows: Vec<f64> = idx
                        .iter()
                        .enumerate()
                        .flat_map(|(pos, &i)| {
                            let s = if pos > 0 && (signs >> (pos - 1)) & 1 == 1 {
                                -1.0
                            } else {
                                1.0
                            };
                            gens[i].iter().map(move |x| s * x)
                        })
                        .collect();
                    let m = DMatrix::from_row_slice(n, n, &rows);
                    let det = m.determinant();
                    if det.abs() <= 1e-12 * scale.powi(n as i32) {
                        continue;
                    }
                    let Some(c) = m.lu().solve(&DVector::from_element(n, 1.0)) else {
                        continue;
                    };
                    if gens.iter().all(|g| c.dot(g).abs() <= 1.0 + tol) {
                        push_unique(&mut out, c);
                    }
                }
                if !next_combination(&mut idx, k) {
                    break;
                }
            }
        }
    }
    out
}

fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    let scale = v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9 * scale) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

fn push_unique(out: &mut Vec<DVector<f64>>, c: DVector<f64>) {
    let c = canonical_sign(c);
    let tol = 1e-9 * (1.0 + c.norm());
    if !out.iter().any(|d| (d - &c).amax() <= tol) {
        out.push(c);
    }
}

fn next_combination(idx: &mut [usize], k: usize) -> bool {
    let r = idx.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if idx[i] < k - r + i {
            idx[i] += 1;
            for j in (i + 1)..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Convex hull (counter-clockwise, no collinear points) of `±gens` in the plane.
fn symmetric_hull_2d(gens: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut pts: Vec<(f64, f64)> = gens
        .iter()
        .flat_map(|g| [(g[0], g[1]), (-g[0], -g[1])])
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    let scale = pts
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(0.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.into_iter()
        .map(|(x, y)| DVector::from_vec(vec![x, y]))
        .collect()
}

/// Hausdorff distance `sup_u |h_A(u) - h_B(u)|` over `m` quasi-uniform
/// directions, refined locally around the largest samples.
pub fn hausdorff(a: &SymBody, b: &SymBody, m: usize) -> Result<f64> {
    check_same_dim(a, b)?;
    let grid = DirectionGrid::new(a.dim(), m);
    Ok(hausdorff_on(&grid, a, b))
}

pub fn hausdorff_default(a: &SymBody, b: &SymBody) -> Result<f64> {
    hausdorff(a, b, DEFAULT_DIRECTIONS)
}

/// Hausdorff distance on a precomputed grid. Panics on dimension mismatch.
pub fn hausdorff_on(grid: &DirectionGrid, a: &SymBody, b: &SymBody) -> f64 {
    assert_eq!(a.dim(), grid.dim());
    assert_eq!(b.dim(), grid.dim());
    if a == b {
        return 0.0;
    }
    let (va, vb) = (a.vertices(), b.vertices());
    let f = |u: &DVector<f64>| (max_abs_dot(va, u) - max_abs_dot(vb, u)).abs();
    grid.sup(f, true).0
}

pub(crate) fn check_same_dim(a: &SymBody, b: &SymBody) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn square_support() {
        let sq = SymBody::cube(2);
        let e1 = Direction::from_slice(&[1.0, 0.0]).unwrap();
        assert_eq!(sq.support(&e1), 1.0);
        let diag = Direction::from_slice(&[1.0, 1.0]).unwrap();
        assert!((sq.support(&diag) - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cross_polytope_support_and_gauge() {
        let cp = SymBody::cross_polytope(2);
        let diag = Direction::from_slice(&[1.0, 1.0]).unwrap();
        assert!((cp.support(&diag) - 1.0 / SQRT_2).abs() < 1e-12);
        assert!((cp.gauge(&v(&[1.0, 1.0])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_gauge() {
        let sq = SymBody::cube(2);
        assert_eq!(sq.gauge(&v(&[1.0, 1.0])), 1.0);
        assert_eq!(sq.gauge(&v(&[2.0, 0.0])), 2.0);
        assert_eq!(sq.gauge(&v(&[0.0, 0.0])), 0.0);
    }

    #[test]
    fn rejects_zero_and_rank_deficient() {
        let zero = SymBody::from_rows(Rep::V, &[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(zero, Err(GeomError::ZeroGenerator { index: 1 })));
        let flat = SymBody::from_rows(Rep::H, &[vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(flat, Err(GeomError::NotFullDimensional { .. })));
        let few = SymBody::from_rows(Rep::V, &[vec![1.0, 0.0]]);
        assert!(few.is_err());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let sq = SymBody::cube(2);
        let text = sq.to_json();
        assert_eq!(text, r#"{"n":2,"rep":"H","gens":[[1.0,0.0],[0.0,1.0]]}"#);
        assert_eq!(SymBody::from_json(&text).unwrap(), sq);
        assert!(SymBody::from_json(r#"{"n":2,"rep":"V","gens":[[0,0],[1,0]]}"#).is_err());
        assert!(SymBody::from_json(r#"{"n":2,"rep":"V","gens":[[1,2]]}"#).is_err());
        assert!(SymBody::from_json(r#"{"n":2,"rep":"X","gens":[[1,0],[0,1]]}"#).is_err());
    }

    #[test]
    fn polar_swaps_tag_and_is_involution() {
        let cp = SymBody::cross_polytope(2);
        let p = cp.polar();
        assert_eq!(p.rep(), Rep::H);
        assert_eq!(p.gens(), cp.gens());
        assert_eq!(p.polar(), cp);
    }

    #[test]
    fn dual_of_square_is_cross_polytope() {
        let sq = SymBody::cube(2);
        let mut verts: Vec<Vec<f64>> = sq
            .vertices()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        verts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(verts.len(), 2);
        for vtx in &verts {
            assert!((vtx[0].abs() - 1.0).abs() < 1e-12 && (vtx[1].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_vertices_3d() {
        let c = SymBody::cube(3);
        assert_eq!(c.vertices().len(), 4);
        let oct = SymBody::cross_polytope(3);
        assert_eq!(oct.facets().len(), 4);
        for a in oct.facets() {
            for x in a.iter() {
                assert!((x.abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interior_generators_are_not_vertices() {
        let b = SymBody::from_rows(
            Rep::V,
            &[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.2, 0.2],
                vec![0.5, 0.5],
            ],
        )
        .unwrap();
        // (0.5, 0.5) lies on the edge of the diamond
        assert_eq!(b.facets().len(), 2);
        assert!((b.gauge(&v(&[0.5, 0.5])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn act_identity_is_exact() {
        let sq = SymBody::cube(2);
        assert_eq!(sq.act(&GroupElem::identity(2)), sq);
        let cp = SymBody::cross_polytope(3);
        assert_eq!(cp.act(&GroupElem::identity(3)), cp);
    }

    #[test]
    fn act_scaling_doubles_support() {
        let disk = SymBody::ball(2, 64);
        let twice = disk.act(&GroupElem::scaling(2, 2.0).unwrap());
        for u in DirectionGrid::new(2, 37).directions() {
            assert!((twice.support_raw(u) - 2.0 * disk.support_raw(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn hausdorff_examples() {
        let b1 = SymBody::ball(2, 256);
        let b2 = b1.act(&GroupElem::scaling(2, 2.0).unwrap());
        assert!((hausdorff(&b1, &b2, 512).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(hausdorff(&b1, &b1, 512).unwrap(), 0.0);
        assert!(matches!(
            hausdorff(&b1, &SymBody::cube(3), 16),
            Err(GeomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn one_dimensional_bodies() {
        let seg = SymBody::from_rows(Rep::V, &[vec![2.0], vec![-0.5]]).unwrap();
        assert_eq!(seg.support_raw(&v(&[1.0])), 2.0);
        assert!((seg.gauge(&v(&[1.0])) - 0.5).abs() < 1e-15);
        assert_eq!(seg.polar().support_raw(&v(&[1.0])), 0.5);
    }
}
