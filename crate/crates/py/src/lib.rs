//! Python bindings for `slicekit`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::json;

use slicekit::body::{hausdorff as hausdorff_dist, Rep, SymBody};
use slicekit::demo::{demo_slicing_map, discontinuity_table as table, DemoPoint, DemoSlice};
use slicekit::ellipsoid::{john as john_ellipsoid, lowner as lowner_ellipsoid, DEFAULT_EPS};
use slicekit::error::GeomError;
use slicekit::group::GroupElem;
use slicekit::orbit::{bm_distance as bm, quotient_distance as quotient, OrbitSearchOptions};
use slicekit::random::random_corpus as corpus;
use slicekit::slice::{john_position as jpos, slicing_map_john};

fn to_py(e: GeomError) -> PyErr {
    match e {
        GeomError::NoConvergence(_) | GeomError::SingularMatrix { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rows_of(v: &serde_json::Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v.clone()).expect("matrix rows")
}

fn group(rows: Vec<Vec<f64>>) -> PyResult<GroupElem> {
    serde_json::from_value(json!({ "g": rows })).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn search(eps: f64, seed: u64) -> OrbitSearchOptions {
    OrbitSearchOptions {
        eps,
        seed,
        ..OrbitSearchOptions::default()
    }
}

/// Origin-symmetric polytope, `conv{±g_i}` ("V") or `{x : |<g_i, x>| <= 1}` ("H").
#[pyclass(name = "Body", module = "pyslicekit", frozen)]
#[derive(Clone)]
pub struct PyBody {
    inner: SymBody,
}

#[pymethods]
impl PyBody {
    #[new]
    fn new(rep: &str, gens: Vec<Vec<f64>>) -> PyResult<Self> {
        let rep = match rep {
            "V" => Rep::V,
            "H" => Rep::H,
            other => {
                return Err(PyValueError::new_err(format!(
                    "rep must be V or H, got {other}"
                )))
            }
        };
        SymBody::from_rows(rep, &gens)
            .map(|inner| PyBody { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        SymBody::from_json(text)
            .map(|inner| PyBody { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn cube(n: usize) -> Self {
        PyBody {
            inner: SymBody::cube(n),
        }
    }

    #[staticmethod]
    fn cross_polytope(n: usize) -> Self {
        PyBody {
            inner: SymBody::cross_polytope(n),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (n, m=256))]
    fn ball(n: usize, m: usize) -> Self {
        PyBody {
            inner: SymBody::ball(n, m),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn rep(&self) -> &'static str {
        match self.inner.rep() {
            Rep::V => "V",
            Rep::H => "H",
        }
    }

    fn gens(&self) -> Vec<Vec<f64>> {
        self.inner
            .gens()
            .iter()
            .map(|g| g.iter().copied().collect())
            .collect()
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner
            .vertices()
            .iter()
            .map(|g| g.iter().copied().collect())
            .collect()
    }

    fn support(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_len(&x)?;
        Ok(self.inner.support_raw(&x.into()))
    }

    fn gauge(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_len(&x)?;
        Ok(self.inner.gauge(&x.into()))
    }

    fn polar(&self) -> Self {
        PyBody {
            inner: self.inner.polar(),
        }
    }

    /// `g A` for an invertible matrix given as rows.
    fn act(&self, g: Vec<Vec<f64>>) -> PyResult<Self> {
        let g = group(g)?;
        if g.dim() != self.inner.dim() {
            return Err(PyValueError::new_err("matrix and body dimensions differ"));
        }
        Ok(PyBody {
            inner: self.inner.act(&g),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Body(rep={:?}, n={}, gens={})",
            self.rep(),
            self.inner.dim(),
            self.inner.gens().len()
        )
    }

    fn __eq__(&self, other: &PyBody) -> bool {
        self.inner == other.inner
    }
}

impl PyBody {
    fn check_len(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected a vector of length {}, got {}",
                self.inner.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

/// Matrix `M` of the John ellipsoid `{x : x^T M x <= 1}`.
#[pyfunction]
#[pyo3(signature = (body, eps=DEFAULT_EPS))]
fn john(body: &PyBody, eps: f64) -> PyResult<Vec<Vec<f64>>> {
    let e = john_ellipsoid(&body.inner, eps).map_err(to_py)?;
    Ok(rows_of(&serde_json::to_value(&e).expect("serializes")["M"]))
}

/// Matrix `M` of the Löwner ellipsoid.
#[pyfunction]
#[pyo3(signature = (body, eps=DEFAULT_EPS))]
fn lowner(body: &PyBody, eps: f64) -> PyResult<Vec<Vec<f64>>> {
    let e = lowner_ellipsoid(&body.inner, eps).map_err(to_py)?;
    Ok(rows_of(&serde_json::to_value(&e).expect("serializes")["M"]))
}

#[pyfunction]
#[pyo3(signature = (body, eps=DEFAULT_EPS))]
fn john_position(body: &PyBody, eps: f64) -> PyResult<PyBody> {
    jpos(&body.inner, eps)
        .map(|inner| PyBody { inner })
        .map_err(to_py)
}

/// PD matrix `P` with `P^{-1} A` in John position.
#[pyfunction]
#[pyo3(signature = (body, eps=DEFAULT_EPS))]
fn slice_map(body: &PyBody, eps: f64) -> PyResult<Vec<Vec<f64>>> {
    let p = slicing_map_john(&body.inner, eps).map_err(to_py)?;
    Ok(rows_of(&serde_json::to_value(&p).expect("serializes")["P"]))
}

#[pyfunction]
#[pyo3(signature = (a, b, directions=4096))]
fn hausdorff(a: &PyBody, b: &PyBody, directions: usize) -> PyResult<f64> {
    hausdorff_dist(&a.inner, &b.inner, directions).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a, b, eps=DEFAULT_EPS, seed=42))]
fn bm_distance(py: Python<'_>, a: &PyBody, b: &PyBody, eps: f64, seed: u64) -> PyResult<f64> {
    py.allow_threads(|| bm(&a.inner, &b.inner, &search(eps, seed)))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a, b, eps=DEFAULT_EPS, seed=42))]
fn quotient_distance(py: Python<'_>, a: &PyBody, b: &PyBody, eps: f64, seed: u64) -> PyResult<f64> {
    py.allow_threads(|| quotient(&a.inner, &b.inner, &search(eps, seed)))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (seed, n, count))]
fn random_corpus(seed: u64, n: usize, count: usize) -> PyResult<Vec<PyBody>> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be positive"));
    }
    Ok(corpus(seed, n, count)
        .into_iter()
        .map(|inner| PyBody { inner })
        .collect())
}

/// Slicing map of the planar toy action for `slice` in {"circle", "hyperbola"}.
#[pyfunction]
fn demo_map(slice: &str, x: f64, y: f64) -> PyResult<f64> {
    let s = match slice {
        "circle" => DemoSlice::Circle,
        "hyperbola" => DemoSlice::Hyperbola,
        other => return Err(PyValueError::new_err(format!("unknown slice {other}"))),
    };
    let p = DemoPoint::new(x, y).map_err(to_py)?;
    Ok(demo_slicing_map(s, &p))
}

/// Rows `(k, f_S(1/k, 1))` for the hyperbola slice.
#[pyfunction]
fn discontinuity_table(k_max: u64) -> Vec<(u64, f64)> {
    table(k_max)
}

#[pymodule]
fn pyslicekit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBody>()?;
    m.add_function(wrap_pyfunction!(john, m)?)?;
    m.add_function(wrap_pyfunction!(lowner, m)?)?;
    m.add_function(wrap_pyfunction!(john_position, m)?)?;
    m.add_function(wrap_pyfunction!(slice_map, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(bm_distance, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_distance, m)?)?;
    m.add_function(wrap_pyfunction!(random_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(demo_map, m)?)?;
    m.add_function(wrap_pyfunction!(discontinuity_table, m)?)?;
    m.add("DEFAULT_EPS", DEFAULT_EPS)?;
    Ok(())
}
