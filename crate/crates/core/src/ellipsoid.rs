//! Centered minimum-volume enclosing ellipsoids and, through polarity, the
//! John and Löwner ellipsoids of symmetric bodies.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::body::{Rep, SymBody};
use crate::error::{GeomError, Result};
use crate::group::{matrix_to_rows, rows_to_matrix, GroupElem};
use crate::linalg;

/// Default solver tolerance on `max_i kappa_i <= n (1 + eps)`.
pub const DEFAULT_EPS: f64 = 1e-7;

/// `E = {x : x^T M x <= 1}` for symmetric positive-definite `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EllipsoidJson", into = "EllipsoidJson")]
pub struct Ellipsoid {
    m: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct EllipsoidJson {
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
}

impl TryFrom<EllipsoidJson> for Ellipsoid {
    type Error = GeomError;

    fn try_from(value: EllipsoidJson) -> Result<Self> {
        Ellipsoid::new(rows_to_matrix(&value.m)?)
    }
}

impl From<Ellipsoid> for EllipsoidJson {
    fn from(e: Ellipsoid) -> Self {
        EllipsoidJson {
            m: matrix_to_rows(&e.m),
        }
    }
}

impl Ellipsoid {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        linalg::check_pd(&m)?;
        Ok(Ellipsoid {
            m: linalg::symmetrize(&m),
        })
    }

    pub fn unit_ball(n: usize) -> Self {
        Ellipsoid {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Polar ellipsoid, `M -> M^{-1}`.
    pub fn polar(&self) -> Ellipsoid {
        Ellipsoid {
            m: linalg::sym_inv(&self.m),
        }
    }

    /// Image `gE`, i.e. `M -> g^{-T} M g^{-1}`.
    pub fn transform(&self, g: &GroupElem) -> Ellipsoid {
        let git = g.inverse_transpose();
        Ellipsoid {
            m: linalg::symmetrize(&(&git * &self.m * git.transpose())),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.quad(x) <= 1.0 + tol
    }

    /// `x^T M x`.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.m * x))
    }

    /// Support function `sqrt(u^T M^{-1} u)`.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        let minv = linalg::sym_inv(&self.m);
        u.dot(&(&minv * u)).sqrt()
    }

    pub fn log_det(&self) -> f64 {
        self.m.determinant().ln()
    }

    /// The linear map `M^{-1/2}` carrying the unit ball onto the ellipsoid.
    pub fn shape(&self) -> DMatrix<f64> {
        linalg::sym_pow(&self.m, -0.5)
    }

    /// Frobenius distance between the defining matrices.
    pub fn distance(&self, other: &Ellipsoid) -> f64 {
        (&self.m - &other.m).norm()
    }

    /// Boundary sample as a `V` body with `m` generators.
    pub fn to_body(&self, m: usize) -> SymBody {
        let g = GroupElem::new(self.shape()).expect("PD shape is invertible");
        SymBody::ball(self.dim(), m).act(&g)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MveeOptions {
    pub eps: f64,
    /// Defaults to `100_000 * n`.
    pub max_iter: Option<usize>,
    pub record_trace: bool,
}

impl Default for MveeOptions {
    fn default() -> Self {
        MveeOptions {
            eps: DEFAULT_EPS,
            max_iter: None,
            record_trace: false,
        }
    }
}

impl MveeOptions {
    pub fn with_eps(eps: f64) -> Self {
        MveeOptions {
            eps,
            ..Default::default()
        }
    }
}

/// Solver output. `weights` are the dual weights on the input points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MveeReport {
    pub ellipsoid: Ellipsoid,
    pub weights: Vec<f64>,
    /// Achieved `max_i kappa_i / n - 1` before the final rescale.
    pub epsilon: f64,
    pub iterations: usize,
    /// `log det Lambda(p)` after every iteration, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_det_trace: Vec<f64>,
}

/// Optimality diagnostics of an MVEE solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResiduals {
    /// `|| n sum_i p_i M x_i x_i^T / c - I ||_F` with `c` normalizing the trace to `n`.
    pub stationarity: f64,
    /// `sum_i p_i |x_i^T M x_i - 1|`.
    pub complementarity: f64,
    /// `max(0, max_i x_i^T M x_i - 1)`.
    pub infeasibility: f64,
}

impl MveeReport {
    pub fn kkt_residuals(&self, points: &[DVector<f64>]) -> KktResiduals {
        let m = self.ellipsoid.matrix();
        let n = m.nrows();
        let mut s = DMatrix::zeros(n, n);
        let mut complementarity = 0.0;
        let mut worst = f64::NEG_INFINITY;
        for (x, &p) in points.iter().zip(&self.weights) {
            let q = x.dot(&(m * x));
            worst = worst.max(q);
            if p > 0.0 {
                s += (m * x) * x.transpose() * (p * n as f64);
                complementarity += p * (q - 1.0).abs();
            }
        }
        let c = s.trace() / n as f64;
        let stationarity = (s / c - DMatrix::<f64>::identity(n, n)).norm();
        KktResiduals {
            stationarity,
            complementarity,
            infeasibility: (worst - 1.0).max(0.0),
        }
    }
}

/// Minimum-volume origin-centered ellipsoid containing `±points`.
///
/// Frank–Wolfe on the weights `p` of `Lambda(p) = sum_i p_i x_i x_i^T`, with
/// away steps so that the weights of non-touching points decay to zero. Each
/// iteration either moves toward the point with the largest
/// `kappa_i = x_i^T Lambda^{-1} x_i` using the exact step
/// `(kappa/n - 1)/(kappa - 1)`, or away from the weighted point with the
/// smallest `kappa_i`. Stops once `max kappa <= n(1+eps)` and every weighted
/// point has `kappa >= n(1-eps)`. The returned matrix is `Lambda^{-1}/max kappa`,
/// so every input point lies inside the ellipsoid.
pub fn mvee_centered(points: &[DVector<f64>], opts: &MveeOptions) -> Result<MveeReport> {
    let eps = opts.eps;
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(GeomError::InvalidParameter(format!(
            "eps must lie in (0, 1e-2], got {eps}"
        )));
    }
    let n = points.first().map_or(0, |p| p.len());
    if n == 0 {
        return Err(GeomError::NotFullDimensional { n, rank: 0 });
    }
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let rank = linalg::rank_of_rows(points, n);
    if rank < n {
        return Err(GeomError::NotFullDimensional { n, rank });
    }
    let k = points.len();
    let nf = n as f64;
    let max_iter = opts.max_iter.unwrap_or(100_000 * n);

    let mut p = vec![1.0 / k as f64; k];
    let mut kappa = vec![0.0; k];
    let mut trace = Vec::new();
    let mut iterations = 0;

    let lambda_of = |p: &[f64]| {
        let mut l = DMatrix::<f64>::zeros(n, n);
        for (x, &w) in points.iter().zip(p) {
            if w > 0.0 {
                l.ger(w, x, x, 1.0);
            }
        }
        l
    };

    loop {
        let lambda = lambda_of(&p);
        let chol = lambda
            .clone()
            .cholesky()
            .ok_or(GeomError::NotFullDimensional { n, rank: n - 1 })?;
        for (kap, x) in kappa.iter_mut().zip(points) {
            *kap = x.dot(&chol.solve(x));
        }
        if opts.record_trace {
            trace.push(chol.determinant().ln());
        }
        let (j, kmax) = argmax_by(&kappa, |_| true);
        let (l, kmin) = argmin_by(&kappa, |i| p[i] > 0.0);
        let converged = kmax <= nf * (1.0 + eps) && kmin >= nf * (1.0 - eps);
        if converged || iterations >= max_iter {
            let m = lambda
                .try_inverse()
                .ok_or(GeomError::NotFullDimensional { n, rank: n - 1 })?
                / kmax;
            let report = MveeReport {
                ellipsoid: Ellipsoid::new(linalg::symmetrize(&m))?,
                weights: p,
                epsilon: kmax / nf - 1.0,
                iterations,
                log_det_trace: trace,
            };
            if converged {
                return Ok(report);
            }
            return Err(GeomError::NoConvergence(Box::new(report)));
        }
        iterations += 1;

        if iterations % POLISH_EVERY == 0 {
            if let Some(q) = newton_polish(points, &p, chol.determinant().ln()) {
                p = q;
                continue;
            }
        }

        if kmax - nf >= nf - kmin {
            let tau = (kmax / nf - 1.0) / (kmax - 1.0);
            for w in p.iter_mut() {
                *w *= 1.0 - tau;
            }
            p[j] += tau;
        } else {
            let drop = p[l] / (1.0 - p[l]);
            let s = if n > 1 && kmin > 1.0 {
                (nf - kmin) / (kmin * (nf - 1.0))
            } else {
                1.0
            };
            let tau = if s >= 1.0 {
                drop
            } else {
                (s / (1.0 - s)).min(drop)
            };
            for w in p.iter_mut() {
                *w *= 1.0 + tau;
            }
            if tau >= drop {
                p[l] = 0.0;
            } else {
                p[l] -= tau;
            }
        }
    }
}

const POLISH_EVERY: usize = 64;

/// Newton iterations for `kappa_i(p) = n` on the current support of `p`.
/// Returns new weights only if they stay positive and increase `log det`.
fn newton_polish(points: &[DVector<f64>], p: &[f64], log_det: f64) -> Option<Vec<f64>> {
    let n = points[0].len();
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let mut q = p.to_vec();
    let mut current = log_det;
    for _ in 0..8 {
        let mut lambda = DMatrix::<f64>::zeros(n, n);
        for &i in &support {
            lambda.ger(q[i], &points[i], &points[i], 1.0);
        }
        let chol = lambda.cholesky()?;
        let solved: Vec<DVector<f64>> = support.iter().map(|&i| chol.solve(&points[i])).collect();
        let s = support.len();
        let h = DMatrix::from_fn(s, s, |a, b| points[support[a]].dot(&solved[b]).powi(2));
        let resid = DVector::from_fn(s, |a, _| points[support[a]].dot(&solved[a]) - n as f64);
        if resid.amax() <= 1e-14 * n as f64 {
            break;
        }
        let step = h.svd(true, true).solve(&resid, 1e-12).ok()?;
        let mut next = q.clone();
        for (a, &i) in support.iter().enumerate() {
            next[i] += step[a];
            if next[i] <= 0.0 {
                return None;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|w| *w /= total);
        let mut l2 = DMatrix::<f64>::zeros(n, n);
        for &i in &support {
            l2.ger(next[i], &points[i], &points[i], 1.0);
        }
        let ld = l2.cholesky()?.determinant().ln();
        if ld.is_nan() || ld < current {
            break;
        }
        current = ld;
        q = next;
    }
    if current > log_det {
        Some(q)
    } else {
        None
    }
}

fn argmax_by(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if keep(i) && x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn argmin_by(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if keep(i) && x < best.1 {
            best = (i, x);
        }
    }
    best
}

/// Löwner ellipsoid `l(A)`: the MVEE of the vertices of `A`.
///
/// For `H` bodies the vertices are the polar body's facet functionals, so this
/// is `l(A) = j(A°)°`.
pub fn lowner(a: &SymBody, eps: f64) -> Result<Ellipsoid> {
    Ok(lowner_report(a, eps)?.ellipsoid)
}

pub fn lowner_report(a: &SymBody, eps: f64) -> Result<MveeReport> {
    mvee_centered(a.vertices(), &MveeOptions::with_eps(eps))
}

/// John ellipsoid `j(A)`, the polar of the Löwner ellipsoid of `A°`.
pub fn john(a: &SymBody, eps: f64) -> Result<Ellipsoid> {
    let polar_lowner = match a.rep() {
        Rep::H => mvee_centered(a.gens(), &MveeOptions::with_eps(eps))?,
        Rep::V => lowner_report(&a.polar(), eps)?,
    };
    Ok(polar_lowner.ellipsoid.polar())
}

/// John ellipsoid together with the smallest `t` such that `A` lies in
/// `t j(A)`. For a body in John position `t <= sqrt(n)`.
#[derive(Clone, Debug)]
pub struct ContainmentBounds {
    pub inner: Ellipsoid,
    pub outer_factor: f64,
}

pub fn containment_bounds(a: &SymBody, eps: f64) -> Result<ContainmentBounds> {
    let inner = john(a, eps)?;
    let outer_factor = a
        .vertices()
        .iter()
        .map(|v| inner.quad(v).sqrt())
        .fold(0.0, f64::max);
    Ok(ContainmentBounds {
        inner,
        outer_factor,
    })
}

/// Löwner ellipsoid together with the largest `r` such that `r l(A)` lies in
/// `A`. For a body in Löwner position `r >= 1/sqrt(n)`.
#[derive(Clone, Debug)]
pub struct LownerBounds {
    pub outer: Ellipsoid,
    pub inner_factor: f64,
}

pub fn lowner_bounds(a: &SymBody, eps: f64) -> Result<LownerBounds> {
    let outer = lowner(a, eps)?;
    let widest = a
        .facets()
        .iter()
        .map(|f| outer.support(f))
        .fold(0.0, f64::max);
    Ok(LownerBounds {
        outer,
        inner_factor: 1.0 / widest,
    })
}
