//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Square roots, inverses and powers of symmetric positive-definite matrices all
//! go through the symmetric eigendecomposition with eigenvalues floored at
//! [`EIGEN_FLOOR`].

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Floor applied to eigenvalues when taking powers of PD matrices.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Threshold on `|det|` below which a matrix counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Default tolerance for geometric comparisons.
pub const GEOM_TOL: f64 = 1e-9;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `M^p` for symmetric positive-definite `M`.
pub fn sym_pow(m: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let vals = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR).powf(p));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&vals) * q.transpose()
}

pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_pow(m, 0.5)
}

pub fn sym_inv(m: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&sym_pow(m, -1.0))
}

/// Checks the PD invariant shared by `Ellipsoid` and `PosDef`.
pub fn check_pd(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(GeomError::NotPositiveDefinite(format!(
            "not square ({}x{})",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::NotPositiveDefinite("non-finite entry".into()));
    }
    let asym = max_abs(&(m - m.transpose()));
    if asym > 1e-10 * (1.0 + max_abs(m)) {
        return Err(GeomError::NotPositiveDefinite(format!(
            "asymmetry {asym:e}"
        )));
    }
    let min_eig = symmetrize(m).symmetric_eigen().eigenvalues.min();
    if min_eig <= EIGEN_FLOOR {
        return Err(GeomError::NotPositiveDefinite(format!(
            "smallest eigenvalue {min_eig:e}"
        )));
    }
    Ok(())
}

/// Numerical rank of the matrix whose rows are `rows`.
pub fn rank_of_rows(rows: &[DVector<f64>], n: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * smax).count()
}

/// Rotation by `theta` in the plane.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Cayley transform of the skew matrix built from `params` (upper triangle,
/// row-major). Always orthogonal with determinant one.
pub fn cayley(n: usize, params: &[f64]) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            k[(i, j)] = params[idx];
            k[(j, i)] = -params[idx];
            idx += 1;
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    let lhs = &id - &k;
    let rhs = &id + &k;
    lhs.lu()
        .solve(&rhs)
        .expect("I - K is invertible for skew K")
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}
