use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg::{self, SINGULAR_TOL};

/// An element of GL(n), i.e. an invertible `n x n` matrix.
///
/// `is_orthogonal` is computed once at construction: it holds exactly when
/// `max |g^T g - I| <= 1e-9`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupElemJson", into = "GroupElemJson")]
pub struct GroupElem {
    mat: DMatrix<f64>,
    is_orthogonal: bool,
}

#[derive(Serialize, Deserialize)]
struct GroupElemJson {
    g: Vec<Vec<f64>>,
}

impl TryFrom<GroupElemJson> for GroupElem {
    type Error = GeomError;

    fn try_from(value: GroupElemJson) -> Result<Self> {
        GroupElem::new(rows_to_matrix(&value.g)?)
    }
}

impl From<GroupElem> for GroupElemJson {
    fn from(g: GroupElem) -> Self {
        GroupElemJson {
            g: matrix_to_rows(&g.mat),
        }
    }
}

const ORTHO_TOL: f64 = 1e-9;

impl GroupElem {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(GeomError::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let det = mat.determinant();
        if !det.is_finite() || det.abs() <= SINGULAR_TOL {
            return Err(GeomError::SingularMatrix { det });
        }
        let n = mat.nrows();
        let defect = linalg::max_abs(&(mat.transpose() * &mat - DMatrix::identity(n, n)));
        Ok(GroupElem {
            is_orthogonal: defect <= ORTHO_TOL,
            mat,
        })
    }

    pub fn identity(n: usize) -> Self {
        GroupElem {
            mat: DMatrix::identity(n, n),
            is_orthogonal: true,
        }
    }

    pub fn scaling(n: usize, lambda: f64) -> Result<Self> {
        GroupElem::new(DMatrix::identity(n, n) * lambda)
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        GroupElem::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn rotation2(theta: f64) -> Self {
        GroupElem {
            mat: linalg::rotation2(theta),
            is_orthogonal: true,
        }
    }

    /// Reflection across the first coordinate axis in dimension `n`
    /// (negates the last coordinate).
    pub fn reflection(n: usize) -> Self {
        let mut mat = DMatrix::identity(n, n);
        mat[(n - 1, n - 1)] = -1.0;
        GroupElem {
            mat,
            is_orthogonal: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn is_orthogonal(&self) -> bool {
        self.is_orthogonal
    }

    pub fn det(&self) -> f64 {
        self.mat.determinant()
    }

    pub fn compose(&self, other: &GroupElem) -> GroupElem {
        GroupElem::new(&self.mat * &other.mat).expect("product of invertible matrices")
    }

    pub fn inverse(&self) -> GroupElem {
        let inv = if self.is_orthogonal {
            self.mat.transpose()
        } else {
            self.mat
                .clone()
                .try_inverse()
                .expect("GroupElem is invertible by construction")
        };
        GroupElem::new(inv).expect("inverse of invertible matrix")
    }

    /// `g^{-T}`, the action on facet functionals.
    pub fn inverse_transpose(&self) -> DMatrix<f64> {
        if self.is_orthogonal {
            self.mat.clone()
        } else {
            self.inverse().mat.transpose()
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.mat * x
    }

    /// Random matrix with Gaussian entries, conditioned to have singular values
    /// in `[1/spread, spread]` by rescaling its SVD.
    pub fn random_gl<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> GroupElem {
        let o1 = GroupElem::random_orthogonal(rng, n);
        let o2 = GroupElem::random_orthogonal(rng, n);
        let log_spread = spread.ln();
        let d: Vec<f64> = (0..n)
            .map(|_| (rng.random_range(-log_spread..=log_spread)).exp())
            .collect();
        let dm = DMatrix::from_diagonal(&DVector::from_vec(d));
        GroupElem::new(&o1.mat * dm * &o2.mat).expect("well-conditioned by construction")
    }

    /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
    /// sign convention fixed by the diagonal of R).
    pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElem {
        loop {
            let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let qr = a.qr();
            let r = qr.r();
            if (0..n).any(|i| r[(i, i)].abs() < 1e-8) {
                continue;
            }
            let mut q = qr.q();
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    let mut col = q.column_mut(j);
                    col *= -1.0;
                }
            }
            return GroupElem {
                mat: q,
                is_orthogonal: true,
            };
        }
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(GeomError::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
