//! Python bindings for `kacz`. Reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use kacz::bounds;
use kacz::density::{eval_density, eval_g};
use kacz::lowerbound;
use kacz::montecarlo::{self, CountMethod, TrialConfig};
use kacz::quadrature::{self, OpenInterval};
use kacz::{DensityForm, Error};

create_exception!(kacz, DomainError, PyValueError);
create_exception!(kacz, UnsupportedScaleError, PyValueError);
create_exception!(kacz, NumericalFailureError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Domain(_) | Error::Parse(_) => DomainError::new_err(msg),
        Error::UnsupportedScale(_) => UnsupportedScaleError::new_err(msg),
        Error::NumericalFailure { .. } => NumericalFailureError::new_err(msg),
    }
}

/// Serializes through JSON into native Python objects.
fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn interval(lo: f64, hi: f64) -> PyResult<OpenInterval> {
    OpenInterval::new(lo, hi).map_err(to_py)
}

/// Exponent set of a sparse polynomial.
#[pyclass(name = "SupportSet", module = "kacz", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PySupportSet(kacz::SupportSet);

#[pymethods]
impl PySupportSet {
    #[new]
    fn new(exponents: Vec<u64>) -> PyResult<Self> {
        kacz::SupportSet::new(exponents).map(Self).map_err(to_py)
    }

    /// Parses `"0,1,4,16"` or `"0..n"`.
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        spec.parse().map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn dense(n: u64) -> Self {
        Self(kacz::SupportSet::dense(n))
    }

    #[staticmethod]
    fn lower_bound_family(k: u32) -> PyResult<Self> {
        kacz::SupportSet::lower_bound_family(k).map(Self).map_err(to_py)
    }

    #[getter]
    fn exponents(&self) -> Vec<u64> {
        self.0.exponents().to_vec()
    }

    fn normalize(&self) -> Self {
        Self(self.0.normalize())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("SupportSet([{}])", self.0)
    }
}

fn form(name: &str) -> PyResult<DensityForm> {
    DensityForm::ALL
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| DomainError::new_err(format!("unknown density form {name:?}")))
}

/// Zero density `ρ_S(t)`; `form` is "sos", "norm" or "logderiv".
#[pyfunction]
#[pyo3(signature = (set, t, form_name = "sos"))]
fn density(set: &PySupportSet, t: f64, form_name: &str) -> PyResult<f64> {
    eval_density(&set.0, t, form(form_name)?).map_err(to_py)
}

/// `ln g_S(t)`.
#[pyfunction]
fn log_g(set: &PySupportSet, t: f64) -> PyResult<f64> {
    eval_g(&set.0, t).map(|v| v.ln()).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (set, lo = 0.0, hi = 1.0, tol = quadrature::DEFAULT_ABS_TOL))]
fn expected_zeros<'py>(
    py: Python<'py>,
    set: &PySupportSet,
    lo: f64,
    hi: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = quadrature::expected_zeros(&set.0, &interval(lo, hi)?, tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (set, tol = quadrature::DEFAULT_ABS_TOL))]
fn expected_zeros_real<'py>(py: Python<'py>, set: &PySupportSet, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = quadrature::expected_zeros_real(&set.0, tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (set, epsilon, tol = quadrature::DEFAULT_ABS_TOL))]
fn tail_mass<'py>(py: Python<'py>, set: &PySupportSet, epsilon: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = quadrature::tail_mass(&set.0, epsilon, tol).map_err(to_py)?;
    to_dict(py, &r)
}

/// A closed-form bound by kind: sqrt, refined, bet, tail, kac, increment,
/// dense-recursive.
#[pyfunction]
#[pyo3(signature = (kind, k = None, epsilon = None))]
fn bound<'py>(py: Python<'py>, kind: &str, k: Option<u64>, epsilon: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = bounds::closed_form_report(kind, k, epsilon).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
fn union_bound<'py>(
    py: Python<'py>,
    s1: &PySupportSet,
    s2: &PySupportSet,
    z1: f64,
    z2: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = bounds::union_bound(&s1.0, &s2.0, z1, z2).map_err(to_py)?;
    to_dict(py, &r)
}

fn method(name: &str) -> PyResult<CountMethod> {
    match name {
        "exact" => Ok(CountMethod::ExactSturm),
        "grid" => Ok(CountMethod::GridSignChange),
        other => Err(DomainError::new_err(format!("unknown method {other:?}"))),
    }
}

/// Distinct real roots of `Σ coeffs[i] x^{e_i}` in `(lo, hi)`.
#[pyfunction]
#[pyo3(signature = (coeffs, set, lo = 0.0, hi = 1.0, method_name = "exact", degree_cap = montecarlo::DEFAULT_DEGREE_CAP))]
fn count_roots(
    coeffs: Vec<f64>,
    set: &PySupportSet,
    lo: f64,
    hi: f64,
    method_name: &str,
    degree_cap: u64,
) -> PyResult<usize> {
    montecarlo::count_real_roots_interval(&coeffs, &set.0, &interval(lo, hi)?, method(method_name)?, degree_cap)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (set, trials = montecarlo::DEFAULT_TRIALS, seed = 0, lo = 0.0, hi = 1.0, method_name = "exact", degree_cap = montecarlo::DEFAULT_DEGREE_CAP))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo<'py>(
    py: Python<'py>,
    set: &PySupportSet,
    trials: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    method_name: &str,
    degree_cap: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = TrialConfig::new(seed, trials, interval(lo, hi)?)
        .with_method(method(method_name)?)
        .with_degree_cap(degree_cap);
    let r = montecarlo::estimate_expected_zeros(&set.0, &cfg).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
fn step_report<'py>(py: Python<'py>, k: u32) -> PyResult<Bound<'py, PyAny>> {
    let r = lowerbound::step_report(k).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (k_max, tol = quadrature::DEFAULT_ABS_TOL))]
fn verify_growth<'py>(py: Python<'py>, k_max: u32, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = lowerbound::verify_growth(k_max, tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pymodule]
#[pyo3(name = "kacz")]
fn kacz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PySupportSet>()?;
    m.add("DomainError", py.get_type::<DomainError>())?;
    m.add("UnsupportedScaleError", py.get_type::<UnsupportedScaleError>())?;
    m.add("NumericalFailureError", py.get_type::<NumericalFailureError>())?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(log_g, m)?)?;
    m.add_function(wrap_pyfunction!(expected_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(expected_zeros_real, m)?)?;
    m.add_function(wrap_pyfunction!(tail_mass, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(union_bound, m)?)?;
    m.add_function(wrap_pyfunction!(count_roots, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(step_report, m)?)?;
    m.add_function(wrap_pyfunction!(verify_growth, m)?)?;
    Ok(())
}
