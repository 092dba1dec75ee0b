//! Orbit space `B(n)/GL(n) = J(n)/O(n)`: distances between orbits, a direct
//! search over `GL(2)` used as an independent check, the Banach–Mazur
//! distance, canonical representatives, and greedy ε-nets.
//!
//! In the plane the minimization over `O(2)` uses support profiles on `m`
//! equally spaced angles: rotating a body by `2 pi s / m` shifts its profile by
//! `s`, and a reflection reverses it. The best shifts are then refined
//! continuously.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{check_same_dim, hausdorff_on, SymBody};
use crate::directions::{DirectionGrid, DEFAULT_DIRECTIONS};
use crate::ellipsoid::DEFAULT_EPS;
use crate::error::{GeomError, Result};
use crate::group::GroupElem;
use crate::linalg;
use crate::optim::{golden_section_min, nelder_mead, NelderMeadOptions};
use crate::slice::{in_john_position, john_position, MEMBERSHIP_TOL};

/// A point of `J(n)`, standing for the orbit `GL(n) rep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrbitPoint {
    pub rep: SymBody,
}

impl OrbitPoint {
    /// John-positions `a`.
    pub fn from_body(a: &SymBody, eps: f64) -> Result<Self> {
        Ok(OrbitPoint {
            rep: john_position(a, eps)?,
        })
    }

    /// Wraps a body that must already be in John position.
    pub fn new(rep: SymBody, eps: f64) -> Result<Self> {
        if !in_john_position(&rep, eps, MEMBERSHIP_TOL)? {
            return Err(GeomError::InvalidParameter(
                "body is not in John position".into(),
            ));
        }
        Ok(OrbitPoint { rep })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrbitSearchOptions {
    /// Tolerance for the John ellipsoid solves.
    pub eps: f64,
    /// Number of rotation angles (`n = 2`).
    pub angles: usize,
    /// Random orthogonal starting points (`n >= 3`).
    pub restarts: usize,
    /// Directions of the coarse objective used during the search (`n >= 3`).
    pub search_directions: usize,
    /// Directions of the final evaluation.
    pub directions: usize,
    /// Continuous refinement after the discrete search.
    pub refine: bool,
    pub seed: u64,
}

impl Default for OrbitSearchOptions {
    fn default() -> Self {
        OrbitSearchOptions {
            eps: DEFAULT_EPS,
            angles: 4096,
            restarts: 64,
            search_directions: 512,
            directions: DEFAULT_DIRECTIONS,
            refine: true,
            seed: 42,
        }
    }
}

fn profile(verts: &[DVector<f64>], dirs: &[DVector<f64>]) -> Vec<f64> {
    dirs.iter().map(|u| support_of(verts, u)).collect()
}

fn support_of(verts: &[DVector<f64>], u: &DVector<f64>) -> f64 {
    verts.iter().map(|v| v.dot(u).abs()).fold(0.0, f64::max)
}

fn transform(verts: &[DVector<f64>], o: &DMatrix<f64>) -> Vec<DVector<f64>> {
    verts.iter().map(|v| o * v).collect()
}

/// `rot(phi)` or `rot(phi) diag(1, -1)`.
fn o2(phi: f64, reflect: bool) -> DMatrix<f64> {
    let mut r = linalg::rotation2(phi);
    if reflect {
        r.column_mut(1).neg_mut();
    }
    r
}

/// Index into the profile of `o B` in terms of the profile of `B`, for the
/// discrete element `o = o2(2 pi s / m, reflect)`.
#[inline]
fn shifted(j: usize, s: usize, m: usize, reflect: bool) -> usize {
    if reflect {
        (s + m - j) % m
    } else {
        (j + m - s) % m
    }
}

/// Scans all `2m` discrete elements of `O(2)` and returns the `keep` best
/// `(score, s, reflect)`, sorted. `score(s, reflect, cutoff)` may stop early
/// and return any value `>= cutoff`.
fn scan_o2<F>(m: usize, keep: usize, score: F) -> Vec<(f64, usize, bool)>
where
    F: Fn(usize, bool, f64) -> f64 + Sync,
{
    let chunks: Vec<(usize, bool)> = (0..m).flat_map(|s| [(s, false), (s, true)]).collect();
    let chunk_len = (chunks.len() / rayon::current_num_threads().max(1)).max(64);
    let mut best: Vec<(f64, usize, bool)> = chunks
        .par_chunks(chunk_len)
        .flat_map_iter(|part| {
            let mut local: Vec<(f64, usize, bool)> = Vec::with_capacity(keep + 1);
            for &(s, r) in part {
                let cutoff = if local.len() < keep {
                    f64::INFINITY
                } else {
                    local[keep - 1].0
                };
                let v = score(s, r, cutoff);
                if v < cutoff {
                    insert_sorted(&mut local, (v, s, r), keep);
                }
            }
            local
        })
        .collect();
    best.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    best.truncate(keep);
    best
}

fn insert_sorted(list: &mut Vec<(f64, usize, bool)>, item: (f64, usize, bool), keep: usize) {
    let pos = list.partition_point(|x| x.0 <= item.0);
    list.insert(pos, item);
    list.truncate(keep);
}

fn sup_diff(ha: &[f64], hb: &[f64], s: usize, reflect: bool, cutoff: f64) -> f64 {
    let m = ha.len();
    let mut worst = 0.0f64;
    for j in 0..m {
        worst = worst.max((ha[j] - hb[shifted(j, s, m, reflect)]).abs());
        if worst >= cutoff {
            return worst;
        }
    }
    worst
}

fn angle_grid(m: usize) -> Vec<DVector<f64>> {
    DirectionGrid::new(2, m).directions().to_vec()
}

/// Result of a minimization over `O(n)`: the value and the minimizing element.
#[derive(Clone, Debug)]
pub struct OrbitMatch {
    pub value: f64,
    pub o: GroupElem,
}

/// `min_o d_H(A, oB)` over `O(n)` for bodies already in John position.
pub fn match_in_o(a: &SymBody, b: &SymBody, opts: &OrbitSearchOptions) -> Result<OrbitMatch> {
    check_same_dim(a, b)?;
    let n = a.dim();
    if a == b {
        return Ok(OrbitMatch {
            value: 0.0,
            o: GroupElem::identity(n),
        });
    }
    let final_grid = DirectionGrid::new(n, opts.directions);
    let candidates: Vec<DMatrix<f64>> = match n {
        1 => vec![DMatrix::identity(1, 1)],
        2 => o2_candidates_hausdorff(a, b, opts),
        _ => on_candidates(a, b, opts, |ha, dirs, vo| {
            dirs.iter()
                .zip(ha)
                .map(|(u, h)| (h - support_of(vo, u)).abs())
                .fold(0.0, f64::max)
        }),
    };
    let mut best: Option<OrbitMatch> = None;
    for o in candidates {
        let o = GroupElem::new(o)?;
        let v = hausdorff_on(&final_grid, a, &b.act(&o));
        if best.as_ref().is_none_or(|bm| v < bm.value) {
            best = Some(OrbitMatch { value: v, o });
        }
    }
    Ok(best.expect("at least one candidate"))
}

fn o2_candidates_hausdorff(
    a: &SymBody,
    b: &SymBody,
    opts: &OrbitSearchOptions,
) -> Vec<DMatrix<f64>> {
    let m = opts.angles.max(8);
    let dirs = angle_grid(m);
    let ha = profile(a.vertices(), &dirs);
    let hb = profile(b.vertices(), &dirs);
    let best = scan_o2(m, 3, |s, r, cutoff| sup_diff(&ha, &hb, s, r, cutoff));
    let vb = b.vertices();
    refine_o2(&best, m, opts.refine, |o| {
        let vo = transform(vb, o);
        dirs.iter()
            .zip(&ha)
            .map(|(u, h)| (h - support_of(&vo, u)).abs())
            .fold(0.0, f64::max)
    })
}

/// Angles of the ratio objective during continuous refinement of the
/// Banach–Mazur search in the plane.
const BM_REFINE_ANGLES: usize = 512;

/// Golden-section refinement of discrete `O(2)` candidates over one grid step
/// on either side.
fn refine_o2<F>(best: &[(f64, usize, bool)], m: usize, refine: bool, f: F) -> Vec<DMatrix<f64>>
where
    F: Fn(&DMatrix<f64>) -> f64,
{
    let step = std::f64::consts::TAU / m as f64;
    best.iter()
        .map(|&(_, s, r)| {
            let phi0 = step * s as f64;
            if !refine {
                return o2(phi0, r);
            }
            let (phi, _) =
                golden_section_min(|p| f(&o2(p, r)), phi0 - step, phi0 + step, 1e-11, 200);
            o2(phi, r)
        })
        .collect()
}

/// Random restarts plus Nelder–Mead over Cayley coordinates, for `n >= 3`.
/// `score(h_A, dirs, vertices of oB)` is the objective on a coarse grid.
fn on_candidates<F>(
    a: &SymBody,
    b: &SymBody,
    opts: &OrbitSearchOptions,
    score: F,
) -> Vec<DMatrix<f64>>
where
    F: Fn(&[f64], &[DVector<f64>], &[DVector<f64>]) -> f64 + Sync,
{
    let n = a.dim();
    let grid = DirectionGrid::new(n, opts.search_directions);
    let dirs = grid.directions();
    let ha = profile(a.vertices(), dirs);
    let vb = b.vertices();
    let eval = |o: &DMatrix<f64>| score(&ha, dirs, &transform(vb, o));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![DMatrix::identity(n, n)];
    for _ in 0..opts.restarts {
        starts.push(GroupElem::random_orthogonal(&mut rng, n).matrix().clone());
    }
    let mut scored: Vec<(f64, usize)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, o)| (eval(o), i))
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let top: Vec<DMatrix<f64>> = scored
        .iter()
        .take(4)
        .map(|&(_, i)| starts[i].clone())
        .collect();
    if !opts.refine {
        return top;
    }
    let dim = n * (n - 1) / 2;
    top.par_iter()
        .map(|o0| {
            let mut o = o0.clone();
            let mut step = 0.2;
            for _ in 0..3 {
                let (p, _) = nelder_mead(
                    |p| eval(&(&o * linalg::cayley(n, p))),
                    &vec![0.0; dim],
                    NelderMeadOptions {
                        initial_step: step,
                        max_evals: 300 * dim,
                        f_tol: 1e-15,
                        x_tol: 1e-11,
                    },
                );
                o = &o * linalg::cayley(n, &p);
                step *= 0.1;
            }
            o
        })
        .collect()
}

/// Quotient distance `d([A], [B]) = min_o d_H(j-pos A, o j-pos B)`.
pub fn quotient_distance(a: &SymBody, b: &SymBody, opts: &OrbitSearchOptions) -> Result<f64> {
    check_same_dim(a, b)?;
    let pa = OrbitPoint::from_body(a, opts.eps)?;
    let pb = OrbitPoint::from_body(b, opts.eps)?;
    quotient_distance_points(&pa, &pb, opts)
}

pub fn quotient_distance_points(
    a: &OrbitPoint,
    b: &OrbitPoint,
    opts: &OrbitSearchOptions,
) -> Result<f64> {
    // fixed argument order makes the numerical search exactly symmetric
    let (a, b) = if generator_order(&a.rep, &b.rep).is_gt() {
        (b, a)
    } else {
        (a, b)
    };
    Ok(match_in_o(&a.rep, &b.rep, opts)?.value)
}

fn generator_order(a: &SymBody, b: &SymBody) -> Ordering {
    let flat =
        |x: &SymBody| -> Vec<f64> { x.gens().iter().flat_map(|g| g.iter().copied()).collect() };
    let (fa, fb) = (flat(a), flat(b));
    fa.len().cmp(&fb.len()).then_with(|| {
        fa.iter()
            .zip(&fb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Grid steps for each of the two angles in `[0, pi)`.
    pub angle_steps: usize,
    /// Grid steps for each log-singular value.
    pub log_steps: usize,
    /// Log-singular values range over `[-log_range, log_range]`.
    pub log_range: f64,
    pub coarse_directions: usize,
    /// Grid candidates passed to local refinement.
    pub refine_top: usize,
    pub refine_directions: usize,
    pub directions: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            angle_steps: 16,
            log_steps: 9,
            log_range: 2.0,
            coarse_directions: 64,
            refine_top: 32,
            refine_directions: 256,
            directions: DEFAULT_DIRECTIONS,
        }
    }
}

/// `g = F^r R(alpha) diag(e^{s1}, e^{s2}) R(beta)`, `F = diag(1, -1)`.
fn gl2(params: &[f64], reflect: bool) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![params[1].exp(), params[2].exp()]));
    let mut g = linalg::rotation2(params[0]) * d * linalg::rotation2(params[3]);
    if reflect {
        g.row_mut(1).neg_mut();
    }
    g
}

/// Upper bound on `inf_g d_H(gA, B)` over `GL(2)`, by a grid over the SVD
/// parameters followed by Nelder–Mead. Works on the bodies as given, without
/// John-positioning. Planar bodies only.
pub fn gl_orbit_distance_oracle(a: &SymBody, b: &SymBody, budget: &OracleBudget) -> Result<f64> {
    check_same_dim(a, b)?;
    if a.dim() != 2 {
        return Err(GeomError::InvalidParameter(
            "the GL orbit oracle is implemented for n = 2 only".into(),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let va = a.vertices();
    let objective = |dirs: &[DVector<f64>], hb: &[f64], g: &DMatrix<f64>| {
        let vg = transform(va, g);
        dirs.iter()
            .zip(hb)
            .map(|(u, h)| (h - support_of(&vg, u)).abs())
            .fold(0.0, f64::max)
    };
    let mean_square = |dirs: &[DVector<f64>], hb: &[f64], g: &DMatrix<f64>| {
        let vg = transform(va, g);
        dirs.iter()
            .zip(hb)
            .map(|(u, h)| (h - support_of(&vg, u)).powi(2))
            .sum::<f64>()
            / dirs.len() as f64
    };

    let coarse = angle_grid(budget.coarse_directions.max(8));
    let hb_coarse = profile(b.vertices(), &coarse);
    let steps = budget.angle_steps.max(1);
    let logs = budget.log_steps.max(1);
    let log_at = |i: usize| {
        if logs == 1 {
            0.0
        } else {
            -budget.log_range + 2.0 * budget.log_range * i as f64 / (logs - 1) as f64
        }
    };
    let angle_at = |i: usize| std::f64::consts::PI * i as f64 / steps as f64;
    let params = |c: &[usize; 4]| [angle_at(c[0]), log_at(c[1]), log_at(c[2]), angle_at(c[3])];
    let mut grid_points = Vec::with_capacity(2 * steps * steps * logs * logs);
    for r in [false, true] {
        for i in 0..steps {
            for j in 0..logs {
                for k in 0..logs {
                    for l in 0..steps {
                        grid_points.push(([i, j, k, l], r));
                    }
                }
            }
        }
    }
    let mut scored: Vec<(f64, usize)> = grid_points
        .par_iter()
        .enumerate()
        .map(|(idx, (c, r))| (objective(&coarse, &hb_coarse, &gl2(&params(c), *r)), idx))
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    // one start per basin: skip grid neighbours of starts already taken
    let near = |a: &([usize; 4], bool), b: &([usize; 4], bool)| {
        let circ = |x: usize, y: usize| {
            let d = x.abs_diff(y);
            d.min(steps - d) <= 1
        };
        a.1 == b.1
            && circ(a.0[0], b.0[0])
            && circ(a.0[3], b.0[3])
            && a.0[1].abs_diff(b.0[1]) <= 1
            && a.0[2].abs_diff(b.0[2]) <= 1
    };
    let mut starts: Vec<usize> = Vec::new();
    for &(_, idx) in &scored {
        if starts.len() >= budget.refine_top.max(1) {
            break;
        }
        if !starts
            .iter()
            .any(|&s| near(&grid_points[s], &grid_points[idx]))
        {
            starts.push(idx);
        }
    }

    let medium = angle_grid(budget.refine_directions.max(8));
    let hb_medium = profile(b.vertices(), &medium);
    let final_grid = DirectionGrid::new(2, budget.directions);
    let refined: Vec<f64> = starts
        .par_iter()
        .map(|&idx| {
            let (c, r) = grid_points[idx];
            let mut p = params(&c).to_vec();
            let mut step = 0.5 * std::f64::consts::PI / steps as f64;
            // the mean square is smooth enough for the simplex to make
            // progress; the sup is polished afterwards
            for round in 0..6 {
                let (q, _) = nelder_mead(
                    |q| {
                        let g = gl2(q, r);
                        if round < 3 {
                            mean_square(&medium, &hb_medium, &g)
                        } else {
                            objective(&medium, &hb_medium, &g)
                        }
                    },
                    &p,
                    NelderMeadOptions {
                        initial_step: step,
                        max_evals: 4000,
                        f_tol: 1e-15,
                        x_tol: 1e-12,
                    },
                );
                p = q;
                step = if round == 2 { 1e-3 } else { step * 0.1 };
            }
            match GroupElem::new(gl2(&p, r)) {
                Ok(g) => hausdorff_on(&final_grid, &a.act(&g), b),
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    Ok(refined.into_iter().fold(f64::INFINITY, f64::min))
}

fn ratio_score(ha: &[f64], hb: &[f64], s: usize, reflect: bool, cutoff: f64) -> f64 {
    let m = ha.len();
    let (mut up, mut down) = (0.0f64, 0.0f64);
    for j in 0..m {
        let r = ha[j] / hb[shifted(j, s, m, reflect)];
        up = up.max(r);
        down = down.max(1.0 / r);
        if up * down >= cutoff {
            return up * down;
        }
    }
    up * down
}

/// `(max_u h_P/h_Q) (max_u h_Q/h_P)` from vertex lists on the given directions.
fn ratio_product(vp: &[DVector<f64>], vq: &[DVector<f64>], dirs: &[DVector<f64>]) -> f64 {
    let (mut up, mut down) = (0.0f64, 0.0f64);
    for u in dirs {
        let r = support_of(vp, u) / support_of(vq, u);
        up = up.max(r);
        down = down.max(1.0 / r);
    }
    up * down
}

/// Banach–Mazur distance estimate: both bodies are John-positioned, then
/// `min_o t(A', oB')` with `t(P, Q) = (max h_P/h_Q)(max h_Q/h_P)`. Never
/// smaller than `1`.
pub fn bm_distance(a: &SymBody, b: &SymBody, opts: &OrbitSearchOptions) -> Result<f64> {
    check_same_dim(a, b)?;
    if a == b {
        return Ok(1.0);
    }
    let pa = john_position(a, opts.eps)?;
    let pb = john_position(b, opts.eps)?;
    let n = a.dim();
    let candidates = match n {
        1 => vec![DMatrix::identity(1, 1)],
        2 => {
            let m = opts.angles.max(8);
            let dirs = angle_grid(m);
            let ha = profile(pa.vertices(), &dirs);
            let hb = profile(pb.vertices(), &dirs);
            let best = scan_o2(m, 3, |s, r, cutoff| ratio_score(&ha, &hb, s, r, cutoff));
            let vb = pb.vertices();
            let fine = angle_grid(m.min(BM_REFINE_ANGLES));
            refine_o2(&best, m, opts.refine, |o| {
                ratio_product(pa.vertices(), &transform(vb, o), &fine)
            })
        }
        _ => on_candidates(&pa, &pb, opts, |ha, dirs, vo| {
            let (mut up, mut down) = (0.0f64, 0.0f64);
            for (u, h) in dirs.iter().zip(ha) {
                let r = h / support_of(vo, u);
                up = up.max(r);
                down = down.max(1.0 / r);
            }
            up * down
        }),
    };
    let grid = DirectionGrid::new(n, opts.directions);
    let va = pa.vertices();
    let mut best = f64::INFINITY;
    for o in candidates {
        let vo = transform(pb.vertices(), &o);
        let up = grid.sup(|u| support_of(va, u) / support_of(&vo, u), true).0;
        let down = grid.sup(|u| support_of(&vo, u) / support_of(va, u), true).0;
        best = best.min(up * down);
    }
    Ok(best.max(1.0))
}

/// Canonical representatives of orbits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossSection {
    pub points: Vec<OrbitPoint>,
    /// Indices whose gauge choice had near-ties between different bodies.
    pub gauge_ambiguity: Vec<usize>,
}

/// Directions of the lexicographic gauge key.
const GAUGE_KEY_DIRECTIONS: usize = 256;
/// Relative tolerance for ties between vertex norms when building a frame.
const FRAME_TIE_TOL: f64 = 1e-6;
/// Key entries closer than this count as equal.
const KEY_EQ_TOL: f64 = 1e-7;
/// Candidates whose keys first differ by less than this are near-ties.
const KEY_AMBIGUITY_TOL: f64 = 1e-5;
const MAX_FRAMES: usize = 128;

/// Maps every body to one representative of its orbit: the John position,
/// rotated so that a frame built from its longest vertices becomes the
/// standard basis. Among the frames allowed by ties, the one with the
/// lexicographically smallest support key wins.
pub fn cross_section_from_slice(orbits: &[SymBody], eps: f64) -> Result<CrossSection> {
    let results: Vec<Result<(OrbitPoint, bool)>> =
        orbits.par_iter().map(|a| canonical_rep(a, eps)).collect();
    let mut points = Vec::with_capacity(orbits.len());
    let mut gauge_ambiguity = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (p, amb) = r?;
        points.push(p);
        if amb {
            gauge_ambiguity.push(i);
        }
    }
    Ok(CrossSection {
        points,
        gauge_ambiguity,
    })
}

fn canonical_rep(a: &SymBody, eps: f64) -> Result<(OrbitPoint, bool)> {
    let pj = john_position(a, eps)?;
    let n = pj.dim();
    let verts = pj.vertices();
    let frames = candidate_frames(verts, n);
    let key_grid = DirectionGrid::new(n, GAUGE_KEY_DIRECTIONS);
    let mut best: Option<(Vec<f64>, DMatrix<f64>)> = None;
    let mut ambiguous = false;
    for o in frames {
        let key = profile(&transform(verts, &o), key_grid.directions());
        match &best {
            None => best = Some((key, o)),
            Some((bk, _)) => match compare_keys(&key, bk) {
                KeyOrder::Less(gap) => {
                    ambiguous = gap < KEY_AMBIGUITY_TOL;
                    best = Some((key, o));
                }
                KeyOrder::Greater(gap) => {
                    if gap < KEY_AMBIGUITY_TOL {
                        ambiguous = true;
                    }
                }
                KeyOrder::Equal => {}
            },
        }
    }
    let (_, o) = best.expect("at least one frame");
    let rep = pj.act(&GroupElem::new(o)?);
    Ok((OrbitPoint { rep }, ambiguous))
}

enum KeyOrder {
    Less(f64),
    Equal,
    Greater(f64),
}

fn compare_keys(a: &[f64], b: &[f64]) -> KeyOrder {
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if d.abs() > KEY_EQ_TOL {
            return if d < 0.0 {
                KeyOrder::Less(-d)
            } else {
                KeyOrder::Greater(d)
            };
        }
    }
    KeyOrder::Equal
}

/// Orthogonal matrices whose rows are frames `f_1..f_n`: `f_k` is the
/// normalized component, orthogonal to `f_1..f_{k-1}`, of a vertex (either
/// sign) whose component there is longest.
fn candidate_frames(verts: &[DVector<f64>], n: usize) -> Vec<DMatrix<f64>> {
    let mut partial: Vec<Vec<DVector<f64>>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for frame in &partial {
            let comps: Vec<DVector<f64>> = verts
                .iter()
                .map(|v| {
                    let mut w = v.clone();
                    for f in frame {
                        w -= f * f.dot(v);
                    }
                    w
                })
                .collect();
            let longest = comps.iter().map(|w| w.norm()).fold(0.0, f64::max);
            for w in &comps {
                if w.norm() >= longest * (1.0 - FRAME_TIE_TOL) {
                    for sign in [1.0, -1.0] {
                        let mut f = frame.clone();
                        f.push(w * (sign / w.norm()));
                        next.push(f);
                    }
                }
            }
            if next.len() >= MAX_FRAMES {
                break;
            }
        }
        next.truncate(MAX_FRAMES);
        partial = next;
    }
    partial
        .into_iter()
        .map(|f| DMatrix::from_fn(n, n, |i, j| f[i][j]))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetReport {
    pub eps: f64,
    pub centers: Vec<OrbitPoint>,
    /// Positions of the centers in the sample list.
    pub center_indices: Vec<usize>,
    pub coverage_fraction: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NetOptions {
    /// Quotient-distance search used for the net. Refinement is usually off.
    pub search: OrbitSearchOptions,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions {
            search: OrbitSearchOptions {
                angles: 720,
                restarts: 16,
                search_directions: 256,
                directions: 720,
                refine: false,
                ..OrbitSearchOptions::default()
            },
        }
    }
}

/// Distance oracle over a fixed sample list, with whatever precomputation the
/// dimension allows.
struct NetDistance<'a> {
    samples: &'a [SymBody],
    profiles: Vec<Vec<f64>>,
    opts: OrbitSearchOptions,
}

impl<'a> NetDistance<'a> {
    fn new(samples: &'a [SymBody], opts: OrbitSearchOptions) -> Self {
        let profiles = if samples.first().is_some_and(|s| s.dim() == 2) {
            let dirs = angle_grid(opts.angles.max(8));
            samples
                .par_iter()
                .map(|s| profile(s.vertices(), &dirs))
                .collect()
        } else {
            Vec::new()
        };
        NetDistance {
            samples,
            profiles,
            opts,
        }
    }

    /// Quotient distance if it is at most `cutoff`, otherwise some value above.
    fn distance(&self, i: usize, j: usize, cutoff: f64) -> f64 {
        if self.profiles.is_empty() {
            return match_in_o(&self.samples[i], &self.samples[j], &self.opts)
                .map(|m| m.value)
                .unwrap_or(f64::INFINITY);
        }
        let (ha, hb) = (&self.profiles[i], &self.profiles[j]);
        let m = ha.len();
        let mut best = f64::INFINITY;
        for s in 0..m {
            for r in [false, true] {
                let limit = best.min(cutoff * (1.0 + 1e-12) + f64::MIN_POSITIVE);
                let v = sup_diff(ha, hb, s, r, limit);
                if v < best {
                    best = v;
                }
            }
            if best <= cutoff {
                return best;
            }
        }
        best
    }
}

/// Greedy ε-net of John-positioned samples under the quotient distance: a
/// sample becomes a center when it is farther than `eps` from all earlier
/// centers. Coverage is recomputed against the final center list.
pub fn slice_net(samples: &[SymBody], eps: f64, opts: &NetOptions) -> Result<NetReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(GeomError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if let Some(first) = samples.first() {
        for s in samples {
            check_same_dim(first, s)?;
        }
    }
    let dist = NetDistance::new(samples, opts.search);
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..samples.len() {
        let covered = centers.par_iter().any(|&c| dist.distance(c, i, eps) <= eps);
        if !covered {
            centers.push(i);
        }
    }
    let covered = (0..samples.len())
        .into_par_iter()
        .filter(|&i| centers.iter().any(|&c| dist.distance(c, i, eps) <= eps))
        .count();
    let coverage_fraction = if samples.is_empty() {
        1.0
    } else {
        covered as f64 / samples.len() as f64
    };
    Ok(NetReport {
        eps,
        centers: centers
            .iter()
            .map(|&i| OrbitPoint {
                rep: samples[i].clone(),
            })
            .collect(),
        center_indices: centers,
        coverage_fraction,
    })
}

/// Center counts of greedy nets for several radii.
pub fn net_profile(
    samples: &[SymBody],
    eps_values: &[f64],
    opts: &NetOptions,
) -> Result<Vec<(f64, usize)>> {
    eps_values
        .iter()
        .map(|&e| slice_net(samples, e, opts).map(|r| (e, r.centers.len())))
        .collect()
}

/// Pairwise matrix `d(bodies[i], bodies[j])`.
pub fn distance_matrix<F>(bodies: &[SymBody], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&SymBody, &SymBody) -> Result<f64> + Sync,
{
    let k = bodies.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let values: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| f(&bodies[i], &bodies[j]))
        .collect();
    let mut out = vec![vec![0.0; k]; k];
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        out[i][j] = v;
        out[j][i] = v;
    }
    Ok(out)
}
