//! Global `O(n)`-slices of the space of symmetric bodies.
//!
//! `GL(n)/O(n)` is modelled by positive-definite matrices: the coset `gO(n)`
//! is represented by the `P` of the polar decomposition `g = P O`. The slicing
//! map of the John slice sends `A` to the `P` with `j(A) = P B^n`; dividing it
//! out puts `A` in John position. The Löwner slice works the same way with
//! `l(A)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::body::{hausdorff_on, SymBody};
use crate::directions::DirectionGrid;
use crate::ellipsoid::{john, lowner};
use crate::error::{GeomError, Result};
use crate::group::{matrix_to_rows, GroupElem};
use crate::linalg;
use crate::random::perturb;

/// Slice membership tolerance on `||M_{j(A)} - I||_F`.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// Symmetric positive-definite matrix; canonical representative of a coset
/// in `GL(n)/O(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PosDef {
    p: DMatrix<f64>,
}

impl Serialize for PosDef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            #[serde(rename = "P")]
            p: Vec<Vec<f64>>,
        }
        Repr {
            p: matrix_to_rows(&self.p),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PosDef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(rename = "P")]
            p: Vec<Vec<f64>>,
        }
        let r = Repr::deserialize(d)?;
        let m = crate::group::rows_to_matrix(&r.p).map_err(serde::de::Error::custom)?;
        PosDef::new(m).map_err(serde::de::Error::custom)
    }
}

impl PosDef {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        linalg::check_pd(&p)?;
        Ok(PosDef {
            p: linalg::symmetrize(&p),
        })
    }

    pub fn identity(n: usize) -> Self {
        PosDef {
            p: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn to_group_elem(&self) -> GroupElem {
        GroupElem::new(self.p.clone()).expect("PD matrices are invertible")
    }

    pub fn inverse(&self) -> PosDef {
        PosDef {
            p: linalg::sym_inv(&self.p),
        }
    }

    /// Frobenius distance `||P - Q||_F`.
    pub fn distance(&self, other: &PosDef) -> f64 {
        (&self.p - &other.p).norm()
    }

    pub fn distance_to_identity(&self) -> f64 {
        (&self.p - DMatrix::<f64>::identity(self.dim(), self.dim())).norm()
    }
}

/// `g = P O` with `P = (g g^T)^{1/2}` and `O` orthogonal.
pub fn polar_decompose(g: &GroupElem) -> (PosDef, GroupElem) {
    let m = g.matrix();
    let p = linalg::symmetrize(&linalg::sym_sqrt(&(m * m.transpose())));
    let pinv = linalg::sym_inv(&p);
    let o = GroupElem::new(pinv * m).expect("orthogonal factor is invertible");
    (PosDef { p }, o)
}

/// Slicing map of the John slice: `P` with `j(A) = P B^n`.
pub fn slicing_map_john(a: &SymBody, eps: f64) -> Result<PosDef> {
    let j = john(a, eps)?;
    PosDef::new(j.shape())
}

/// `P^{-1} A` with `P = slicing_map_john(A)`: the body in John position.
pub fn john_position(a: &SymBody, eps: f64) -> Result<SymBody> {
    let p = slicing_map_john(a, eps)?;
    Ok(a.act(&p.inverse().to_group_elem()))
}

/// Slicing map of the Löwner slice: `P` with `l(A) = P B^n`.
pub fn slicing_map_lowner(a: &SymBody, eps: f64) -> Result<PosDef> {
    let l = lowner(a, eps)?;
    PosDef::new(l.shape())
}

pub fn lowner_position(a: &SymBody, eps: f64) -> Result<SymBody> {
    let p = slicing_map_lowner(a, eps)?;
    Ok(a.act(&p.inverse().to_group_elem()))
}

/// Membership in the John slice: `||M_{j(A)} - I||_F <= tol`.
pub fn in_john_position(a: &SymBody, eps: f64, tol: f64) -> Result<bool> {
    let j = john(a, eps)?;
    let n = a.dim();
    Ok((j.matrix() - DMatrix::<f64>::identity(n, n)).norm() <= tol)
}

/// Membership in the Löwner slice.
pub fn in_lowner_position(a: &SymBody, eps: f64, tol: f64) -> Result<bool> {
    let l = lowner(a, eps)?;
    let n = a.dim();
    Ok((l.matrix() - DMatrix::<f64>::identity(n, n)).norm() <= tol)
}

/// A candidate slice: a membership predicate plus, optionally, a retraction
/// of the whole space onto the slice along orbits.
pub trait SliceSet {
    fn contains(&self, a: &SymBody) -> bool;

    fn retract(&self, _a: &SymBody) -> Option<SymBody> {
        None
    }
}

impl<F: Fn(&SymBody) -> bool> SliceSet for F {
    fn contains(&self, a: &SymBody) -> bool {
        self(a)
    }
}

/// The John slice `J(n)`.
#[derive(Clone, Copy, Debug)]
pub struct JohnSlice {
    pub eps: f64,
    pub tol: f64,
}

impl Default for JohnSlice {
    fn default() -> Self {
        JohnSlice {
            eps: crate::ellipsoid::DEFAULT_EPS,
            tol: MEMBERSHIP_TOL,
        }
    }
}

impl SliceSet for JohnSlice {
    fn contains(&self, a: &SymBody) -> bool {
        in_john_position(a, self.eps, self.tol).unwrap_or(false)
    }

    fn retract(&self, a: &SymBody) -> Option<SymBody> {
        john_position(a, self.eps).ok()
    }
}

/// The Löwner slice `L(n)`.
#[derive(Clone, Copy, Debug)]
pub struct LownerSlice {
    pub eps: f64,
    pub tol: f64,
}

impl Default for LownerSlice {
    fn default() -> Self {
        LownerSlice {
            eps: crate::ellipsoid::DEFAULT_EPS,
            tol: MEMBERSHIP_TOL,
        }
    }
}

impl SliceSet for LownerSlice {
    fn contains(&self, a: &SymBody) -> bool {
        in_lowner_position(a, self.eps, self.tol).unwrap_or(false)
    }

    fn retract(&self, a: &SymBody) -> Option<SymBody> {
        lowner_position(a, self.eps).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `o S = S` for `o` in `O(n)`.
    Invariance,
    /// Closed in the saturation, probed through convergent member sequences.
    Closedness,
    /// `gS ∩ S = ∅` for `g` outside `O(n)`.
    Disjointness,
    /// Open saturation, probed through perturbations of members.
    Saturation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: Axiom,
    /// Index into the audited samples.
    pub sample: usize,
    pub g: GroupElem,
    /// `||P - I||_F` for the PD part `P` of `g`.
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomTally {
    pub checks: usize,
    pub failures: usize,
}

impl AxiomTally {
    fn new() -> Self {
        AxiomTally {
            checks: 0,
            failures: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Result of a sampled slice audit. `witnesses` is empty exactly when every
/// sampled check passed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceAuditReport {
    pub members: usize,
    pub h_invariant: bool,
    pub closedness_proxy: bool,
    pub saturation_open_proxy: bool,
    pub invariance: AxiomTally,
    pub closedness: AxiomTally,
    pub disjointness: AxiomTally,
    pub saturation: AxiomTally,
    /// Non-orthogonal group samples too close to `O(n)` to decide axiom 3.
    pub skipped_near_orthogonal: usize,
    pub witnesses: Vec<Witness>,
}

impl SliceAuditReport {
    pub fn disjointness_witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses
            .iter()
            .filter(|w| w.axiom == Axiom::Disjointness)
    }

    pub fn all_passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    /// Axiom 3 is only decided for `g` whose PD part has `||P - I||_F` above this.
    pub pd_threshold: f64,
    /// Perturbation sizes for the closedness and saturation probes.
    pub deltas: [f64; 3],
    pub directions: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            pd_threshold: 1e-3,
            deltas: [1e-2, 1e-3, 1e-4],
            directions: 512,
            seed: 42,
        }
    }
}

/// Audits the slice axioms on samples.
///
/// 1. `o s` stays in `S` for orthogonal group samples;
/// 2. limits of convergent member sequences (`o_k s` with `o_k -> o`, and
///    retractions of shrinking perturbations of `s`) are members;
/// 3. `g s` leaves `S` whenever the PD part of `g` is farther than
///    `pd_threshold` from `I`;
/// 4. small perturbations of members stay in the saturation (their
///    retraction, or the perturbation itself when no retraction is given,
///    lies in `S`).
pub fn check_slice_axioms<S: SliceSet + ?Sized>(
    slice: &S,
    samples: &[SymBody],
    group_samples: &[GroupElem],
    opts: &AuditOptions,
) -> SliceAuditReport {
    let mut witnesses = Vec::new();
    let mut invariance = AxiomTally::new();
    let mut closedness = AxiomTally::new();
    let mut disjointness = AxiomTally::new();
    let mut saturation = AxiomTally::new();
    let mut skipped = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let pd_parts: Vec<(PosDef, f64)> = group_samples
        .iter()
        .map(|g| {
            let (p, _) = polar_decompose(g);
            let d = p.distance_to_identity();
            (p, d)
        })
        .collect();

    let mut members = 0;
    for (idx, s) in samples.iter().enumerate() {
        if !slice.contains(s) {
            continue;
        }
        members += 1;
        let n = s.dim();
        let grid = DirectionGrid::new(n, opts.directions);

        for (g, (_, dist)) in group_samples.iter().zip(&pd_parts) {
            if g.dim() != n {
                continue;
            }
            let moved = s.act(g);
            if g.is_orthogonal() {
                invariance.checks += 1;
                if !slice.contains(&moved) {
                    invariance.failures += 1;
                    witnesses.push(Witness {
                        axiom: Axiom::Invariance,
                        sample: idx,
                        g: g.clone(),
                        violation: *dist,
                    });
                }
            } else if *dist > opts.pd_threshold {
                disjointness.checks += 1;
                if slice.contains(&moved) {
                    disjointness.failures += 1;
                    witnesses.push(Witness {
                        axiom: Axiom::Disjointness,
                        sample: idx,
                        g: g.clone(),
                        violation: *dist,
                    });
                }
            } else {
                skipped += 1;
            }
        }

        // closedness: o_k s -> o s, and retract(perturb(s, delta_k)) -> s
        let limit_rot = group_samples
            .iter()
            .find(|g| g.is_orthogonal() && g.dim() == n)
            .cloned()
            .unwrap_or_else(|| GroupElem::identity(n));
        let limit = s.act(&limit_rot);
        let last = *opts.deltas.last().expect("three deltas");
        let scale = 100.0 * last * (1.0 + s.circumradius());
        let mut seq_ok = true;
        let mut tail = Vec::new();
        for &delta in &opts.deltas {
            let params = vec![delta; n * (n - 1) / 2];
            let o_k = GroupElem::new(limit_rot.matrix() * linalg::cayley(n, &params))
                .expect("orthogonal");
            let rotated = s.act(&o_k);
            seq_ok &= slice.contains(&rotated);
            let retracted = slice.retract(&perturb(&mut rng, s, delta));
            if let Some(r) = &retracted {
                seq_ok &= slice.contains(r);
            }
            tail = vec![(rotated, limit.clone())];
            if let Some(r) = retracted {
                tail.push((r, s.clone()));
            }
        }
        let converged = tail
            .iter()
            .all(|(x, lim)| hausdorff_on(&grid, x, lim) <= scale);
        closedness.checks += 1;
        if !(seq_ok && converged && slice.contains(&limit)) {
            closedness.failures += 1;
            witnesses.push(Witness {
                axiom: Axiom::Closedness,
                sample: idx,
                g: limit_rot.clone(),
                violation: 0.0,
            });
        }

        for &delta in &opts.deltas[..2] {
            saturation.checks += 1;
            let x = perturb(&mut rng, s, delta);
            let ok = match slice.retract(&x) {
                Some(r) => slice.contains(&r),
                None => slice.contains(&x),
            };
            if !ok {
                saturation.failures += 1;
                witnesses.push(Witness {
                    axiom: Axiom::Saturation,
                    sample: idx,
                    g: GroupElem::identity(n),
                    violation: delta,
                });
            }
        }
    }

    SliceAuditReport {
        members,
        h_invariant: invariance.passed(),
        closedness_proxy: closedness.passed(),
        saturation_open_proxy: saturation.passed(),
        invariance,
        closedness,
        disjointness,
        saturation,
        skipped_near_orthogonal: skipped,
        witnesses,
    }
}

/// A linear action of `GL(n)` on `R^m`.
pub trait GlAction {
    fn act(&self, g: &GroupElem, y: &DVector<f64>) -> DVector<f64>;
}

/// `y -> g y` on `R^n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardAction;

impl GlAction for StandardAction {
    fn act(&self, g: &GroupElem, y: &DVector<f64>) -> DVector<f64> {
        g.apply(y)
    }
}

/// Trivial action on `R^m`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrivialAction;

impl GlAction for TrivialAction {
    fn act(&self, _g: &GroupElem, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }
}

/// Action on quadratic forms (column-major `n x n` vectors), `M -> g^{-T} M g^{-1}`;
/// the way ellipsoid matrices transform.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuadraticFormAction;

impl GlAction for QuadraticFormAction {
    fn act(&self, g: &GroupElem, y: &DVector<f64>) -> DVector<f64> {
        let n = g.dim();
        let m = DMatrix::from_column_slice(n, n, y.as_slice());
        let git = g.inverse_transpose();
        let out = &git * m * git.transpose();
        DVector::from_column_slice(out.as_slice())
    }
}

/// Action on covariance-type matrices, `X -> g X g^T`; the way `P^2` of a
/// PD coset representative transforms.
#[derive(Clone, Copy, Debug, Default)]
pub struct CongruenceAction;

impl GlAction for CongruenceAction {
    fn act(&self, g: &GroupElem, y: &DVector<f64>) -> DVector<f64> {
        let n = g.dim();
        let m = DMatrix::from_column_slice(n, n, y.as_slice());
        let out = g.matrix() * m * g.matrix().transpose();
        DVector::from_column_slice(out.as_slice())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExtensionOptions {
    pub eps: f64,
    /// Relative tolerance of the equivariance spot check on the slice.
    pub tol: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            eps: crate::ellipsoid::DEFAULT_EPS,
            tol: 1e-5,
        }
    }
}

/// Extends `f_on_slice`, defined on bodies in John position, to the
/// equivariant map `F(A) = g f(g^{-1} A)` with `g = slicing_map_john(A)`.
///
/// `f_on_slice` must commute with `O(n)` on the slice; this is spot-checked
/// at `g^{-1} A` with a fixed rotation and a reflection.
pub fn extend_equivariant<F, Y>(
    f_on_slice: F,
    action: &Y,
    a: &SymBody,
    opts: &ExtensionOptions,
) -> Result<DVector<f64>>
where
    F: Fn(&SymBody) -> Result<DVector<f64>>,
    Y: GlAction + ?Sized,
{
    let n = a.dim();
    let p = slicing_map_john(a, opts.eps)?;
    let g = p.to_group_elem();
    let s = a.act(&g.inverse());
    let fs = f_on_slice(&s)?;

    let mut probes = vec![GroupElem::reflection(n)];
    if n >= 2 {
        let params: Vec<f64> = (0..n * (n - 1) / 2).map(|i| 0.7 + 0.3 * i as f64).collect();
        probes.push(GroupElem::new(linalg::cayley(n, &params)).expect("orthogonal"));
    }
    for o in &probes {
        let lhs = f_on_slice(&s.act(o))?;
        let rhs = action.act(o, &fs);
        let defect = (&lhs - &rhs).norm() / (1.0 + fs.norm());
        if defect > opts.tol {
            return Err(GeomError::NotEquivariantOnSlice {
                defect,
                tol: opts.tol,
            });
        }
    }
    Ok(action.act(&g, &fs))
}
