//! Python bindings: density matrices, inequality checks, dilation reports,
//! adversarial search and the dimension obstruction.

use loewner_lab::inequality as ineq;
use loewner_lab::search::{self, SearchTarget};
use loewner_lab::state::random_density;
use loewner_lab::{ComplexMatrix, Inequality, LabError, SystemShape};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: LabError) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn shape(labels: Vec<String>, dims: Vec<usize>) -> PyResult<SystemShape> {
    if labels.len() != dims.len() {
        return Err(PyValueError::new_err("labels and dims differ in length"));
    }
    SystemShape::new(labels.into_iter().zip(dims)).map_err(py_err)
}

#[pyclass(name = "DensityMatrix", module = "loewner_lab", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: loewner_lab::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validates a row-major matrix given as real and imaginary parts.
    #[new]
    #[pyo3(signature = (labels, dims, re, im=None))]
    fn new(labels: Vec<String>, dims: Vec<usize>, re: Vec<f64>, im: Option<Vec<f64>>) -> PyResult<Self> {
        let shape = shape(labels, dims)?;
        let d = shape.total_dim();
        let im = im.unwrap_or_else(|| vec![0.0; re.len()]);
        let data = ComplexMatrix::from_parts(d, d, &re, &im).map_err(py_err)?;
        let inner = loewner_lab::DensityMatrix::validate(data, shape).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn maximally_mixed(labels: Vec<String>, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: loewner_lab::DensityMatrix::maximally_mixed(shape(labels, dims)?) })
    }

    #[staticmethod]
    #[pyo3(signature = (first="A", second="B"))]
    fn epr(first: &str, second: &str) -> PyResult<Self> {
        Ok(Self { inner: loewner_lab::DensityMatrix::epr(first, second).map_err(py_err)? })
    }

    /// Seeded Hilbert-Schmidt sample (rank-`rank` Ginibre when given).
    #[staticmethod]
    #[pyo3(signature = (labels, dims, seed, rank=None))]
    fn random(labels: Vec<String>, dims: Vec<usize>, seed: u64, rank: Option<usize>) -> PyResult<Self> {
        let inner = random_density(&shape(labels, dims)?, seed, rank).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: loewner_lab::DensityMatrix::from_json(text).map_err(py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.shape().labels().into_iter().map(String::from).collect()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.shape().dims()
    }

    #[getter]
    fn lambda_min(&self) -> f64 {
        self.inner.lambda_min()
    }

    #[getter]
    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.data();
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
    }

    fn marginal(&self, keep: Vec<String>) -> PyResult<Self> {
        let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
        Ok(Self { inner: self.inner.marginal(&keep).map_err(py_err)? })
    }

    fn regularize(&self, eps: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.regularize(eps).map_err(py_err)? })
    }

    fn tensor(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tensor(&other.inner).map_err(py_err)? })
    }

    fn entropy(&self) -> PyResult<f64> {
        self.inner.von_neumann_entropy().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix{}", self.inner.shape())
    }
}

#[pyclass(name = "LoewnerReport", module = "loewner_lab", frozen, get_all)]
struct PyLoewnerReport {
    inequality: String,
    dims: Vec<usize>,
    alpha: Option<f64>,
    slack_min_eig: f64,
    scale: f64,
    tol_abs: f64,
    verdict: String,
    error: Option<String>,
    json: String,
}

#[pymethods]
impl PyLoewnerReport {
    #[getter]
    fn holds(&self) -> bool {
        self.verdict == "holds"
    }

    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "LoewnerReport({}, slack_min_eig={:e}, verdict={})",
            self.inequality, self.slack_min_eig, self.verdict
        )
    }
}

impl TryFrom<loewner_lab::LoewnerReport> for PyLoewnerReport {
    type Error = PyErr;

    fn try_from(r: loewner_lab::LoewnerReport) -> PyResult<Self> {
        let json = serde_json::to_string(&r).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let verdict = serde_json::to_value(r.verdict)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        Ok(Self {
            inequality: r.inequality.to_string(),
            dims: r.dims,
            alpha: r.alpha,
            slack_min_eig: r.slack_min_eig,
            scale: r.scale,
            tol_abs: r.tol_abs,
            verdict,
            error: r.error,
            json,
        })
    }
}

/// Runs one inequality check; pair inequalities take `(rho_AB, sigma_BC)`.
#[pyfunction]
#[pyo3(signature = (inequality, rho, sigma=None, alpha=None, tol=ineq::DEFAULT_TOL))]
fn check(
    inequality: &str,
    rho: &PyDensityMatrix,
    sigma: Option<&PyDensityMatrix>,
    alpha: Option<f64>,
    tol: f64,
) -> PyResult<PyLoewnerReport> {
    let which: Inequality = inequality.parse().map_err(py_err)?;
    let mut states = vec![rho.inner.clone()];
    if let Some(s) = sigma {
        states.push(s.inner.clone());
    }
    let mut report = loewner_lab::harness::verify_once(which, alpha, &states, tol).map_err(py_err)?;
    report.alpha = alpha.filter(|_| which == Inequality::Renyi);
    report.try_into()
}

#[pyfunction]
fn scalar_wm(rho: &PyDensityMatrix) -> PyResult<f64> {
    ineq::scalar_wm(&rho.inner).map_err(py_err)
}

#[pyfunction]
fn scalar_ssa(rho: &PyDensityMatrix) -> PyResult<f64> {
    ineq::scalar_ssa(&rho.inner).map_err(py_err)
}

#[pyfunction]
fn single_term_spectrum(rho: &PyDensityMatrix) -> PyResult<Vec<f64>> {
    ineq::single_term_spectrum(&rho.inner).map_err(py_err)
}

#[pyfunction]
fn check_dilation<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    sigma: &PyDensityMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    let r = ineq::check_dilation(&rho.inner, &sigma.inner).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("holds", r.holds())?;
    d.set_item("dims", r.dims)?;
    d.set_item("max_abs_diff", r.max_abs_diff)?;
    d.set_item("scale", r.scale)?;
    d.set_item("rho_isometry_defect", r.rho_isometry_defect)?;
    d.set_item("sigma_isometry_defect", r.sigma_isometry_defect)?;
    d.set_item("operator_norm", r.operator_norm)?;
    Ok(d)
}

#[pyfunction]
fn modular_dimension_obstruction<'py>(
    py: Python<'py>,
    da: u64,
    db: u64,
    dc: u64,
    dd: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = ineq::modular_dimension_obstruction(da, db, dc, dd).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("dims", r.dims.to_vec())?;
    d.set_item("cond1", r.cond1)?;
    d.set_item("cond2", r.cond2)?;
    d.set_item("compatible", r.compatible)?;
    Ok(d)
}

/// Nelder-Mead search; `target` is an inequality id, `renyi(α)` or
/// `single_term_max_eig`. Returns the record and the best states.
#[pyfunction]
#[pyo3(signature = (target, dims, budget=5000, restarts=20, seed=42, tol=ineq::DEFAULT_TOL))]
fn maximize_violation<'py>(
    py: Python<'py>,
    target: &str,
    dims: Vec<usize>,
    budget: usize,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let target: SearchTarget = target.parse().map_err(py_err)?;
    let result = py
        .detach(|| search::maximize_violation(target, &dims, budget, restarts, seed, tol))
        .map_err(py_err)?;
    let states: Vec<PyDensityMatrix> = result
        .best_states()
        .map_err(py_err)?
        .into_iter()
        .map(|inner| PyDensityMatrix { inner })
        .collect();
    let d = PyDict::new(py);
    d.set_item("target", result.target.name())?;
    d.set_item("dims", result.dims)?;
    d.set_item("best_objective", result.best_objective)?;
    d.set_item("evaluations", result.evaluations)?;
    d.set_item("restarts", result.restarts)?;
    d.set_item("seed", result.seed)?;
    d.set_item("violations", result.violations)?;
    d.set_item("best_states", states)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "loewner_lab")]
fn loewner_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyLoewnerReport>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_wm, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_ssa, m)?)?;
    m.add_function(wrap_pyfunction!(single_term_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(check_dilation, m)?)?;
    m.add_function(wrap_pyfunction!(modular_dimension_obstruction, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_violation, m)?)?;
    m.add("INEQUALITIES", Inequality::ALL.iter().map(|i| i.as_str()).collect::<Vec<_>>())?;
    Ok(())
}
