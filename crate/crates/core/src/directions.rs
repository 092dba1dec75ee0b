//! Unit directions and deterministic quasi-uniform direction grids on the
//! sphere, with local refinement of suprema over the sphere.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::optim::{golden_section_max, nelder_mead, NelderMeadOptions};

/// A unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(DVector<f64>);

impl Direction {
    pub fn new(u: DVector<f64>) -> Result<Self> {
        let norm = u.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidDirection { norm });
        }
        Ok(Direction(u))
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn normalize(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeomError::InvalidDirection { norm });
        }
        Ok(Direction(v / norm))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Direction::normalize(DVector::from_column_slice(v))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Direction {
        Direction(-&self.0)
    }
}

/// Default number of directions for Hausdorff-type suprema.
pub const DEFAULT_DIRECTIONS: usize = 4096;

const PARALLEL_THRESHOLD: usize = 1024;

/// A fixed deterministic set of unit directions in `R^n`.
///
/// * `n = 1`: `{+1}`;
/// * `n = 2`: `m` equally spaced angles `2 pi j / m`;
/// * `n = 3`: a Fibonacci lattice;
/// * `n >= 4`: normalized Gaussian samples from a fixed seed.
#[derive(Clone, Debug)]
pub struct DirectionGrid {
    n: usize,
    dirs: Vec<DVector<f64>>,
    spacing: f64,
}

impl DirectionGrid {
    pub fn new(n: usize, m: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        let m = m.max(1);
        let dirs: Vec<DVector<f64>> = match n {
            1 => vec![DVector::from_element(1, 1.0)],
            2 => (0..m)
                .map(|j| {
                    let t = std::f64::consts::TAU * j as f64 / m as f64;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                })
                .collect(),
            3 => {
                let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
                (0..m)
                    .map(|j| {
                        let z = 1.0 - (2.0 * j as f64 + 1.0) / m as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let phi = golden * j as f64;
                        DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                    })
                    .collect()
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
                (0..m)
                    .map(|_| {
                        let v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                        let norm: f64 = v.norm();
                        v / norm
                    })
                    .collect()
            }
        };
        let spacing = match n {
            1 => 0.0,
            2 => std::f64::consts::TAU / m as f64,
            _ => {
                let area = sphere_area(n);
                (area / m as f64).powf(1.0 / (n as f64 - 1.0))
            }
        };
        DirectionGrid { n, dirs, spacing }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[DVector<f64>] {
        &self.dirs
    }

    /// Typical angular distance between neighbouring grid directions.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Evaluates `f` on every grid direction. Evaluation may run in parallel;
    /// the output order always matches the grid order.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&DVector<f64>) -> f64 + Sync,
    {
        if self.dirs.len() >= PARALLEL_THRESHOLD {
            self.dirs.par_iter().map(&f).collect()
        } else {
            self.dirs.iter().map(&f).collect()
        }
    }

    /// Supremum of `f` over the unit sphere: maximum over the grid, followed
    /// by local maximization around the best few samples. Returns the value
    /// and the maximizing direction.
    pub fn sup<F>(&self, f: F, refine: bool) -> (f64, DVector<f64>)
    where
        F: Fn(&DVector<f64>) -> f64 + Sync,
    {
        let values = self.evaluate(&f);
        let best = argmax(&values);
        let mut best_val = values[best];
        let mut best_dir = self.dirs[best].clone();
        if !refine || self.n == 1 {
            return (best_val, best_dir);
        }
        for start in top_k(&values, 3) {
            let (v, u) = self.refine_at(&f, start);
            if v > best_val {
                best_val = v;
                best_dir = u;
            }
        }
        (best_val, best_dir)
    }

    fn refine_at<F>(&self, f: &F, start: usize) -> (f64, DVector<f64>)
    where
        F: Fn(&DVector<f64>) -> f64,
    {
        let u0 = &self.dirs[start];
        if self.n == 2 {
            let theta0 = u0[1].atan2(u0[0]);
            let h = self.spacing;
            let eval = |t: f64| f(&DVector::from_vec(vec![t.cos(), t.sin()]));
            let (t, v) = golden_section_max(eval, theta0 - h, theta0 + h, 1e-12, 100);
            return (v, DVector::from_vec(vec![t.cos(), t.sin()]));
        }
        let basis = tangent_basis(u0);
        let to_dir = |t: &[f64]| -> DVector<f64> {
            let mut v = u0.clone();
            for (ti, e) in t.iter().zip(&basis) {
                v += e * *ti;
            }
            let norm = v.norm();
            v / norm
        };
        let (t, v) = nelder_mead(
            |t| -f(&to_dir(t)),
            &vec![0.0; self.n - 1],
            NelderMeadOptions {
                initial_step: 0.5 * self.spacing,
                max_evals: 400 * self.n,
                f_tol: 1e-15,
                x_tol: 1e-11,
            },
        );
        (-v, to_dir(&t))
    }
}

/// Orthonormal basis of the orthogonal complement of unit vector `u`.
pub fn tangent_basis(u: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        let mut v = &e - u * u.dot(&e);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

fn sphere_area(n: usize) -> f64 {
    // surface area of S^{n-1}: 2 pi^{n/2} / Gamma(n/2)
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(n)
}

fn gamma_half_integer(n: usize) -> f64 {
    // Gamma(n/2) for integer n >= 1
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Index of the maximum (lowest index on ties).
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_unit() {
        for n in 1..=5 {
            let g = DirectionGrid::new(n, 200);
            for u in g.directions() {
                assert!((u.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - std::f64::consts::TAU).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn direction_rejects_non_unit() {
        assert!(Direction::new(DVector::from_vec(vec![1.0, 1.0])).is_err());
        assert!(Direction::normalize(DVector::zeros(3)).is_err());
        let u = Direction::from_slice(&[3.0, 4.0]).unwrap();
        assert!((u.as_vector()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn refined_sup_beats_grid() {
        // maximum of <u, a> is |a|, attained off-grid
        let a = DVector::from_vec(vec![0.3, -0.7, 0.5]);
        let g = DirectionGrid::new(3, 64);
        let (v, _) = g.sup(|u| u.dot(&a), true);
        assert!((v - a.norm()).abs() < 1e-9, "{v} vs {}", a.norm());
        let g2 = DirectionGrid::new(2, 16);
        let b = DVector::from_vec(vec![1.0, 0.123]);
        let (v2, _) = g2.sup(|u| u.dot(&b), true);
        assert!((v2 - b.norm()).abs() < 1e-12);
    }
}
