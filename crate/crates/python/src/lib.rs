//! Python bindings: exact Clifford supertraces, Euler forms, fixed-point
//! integrands, the discrete spectral models and the verification suites.
//!
//! Structured results cross the boundary as JSON and arrive as plain
//! Python dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use raysinger_core::chern_weil::{euler_form, SkewFormMatrix};
use raysinger_core::clifford::{supertrace, supertrace_via_berezin, Clifford};
use raysinger_core::local_index::{pipeline_consistency, rhs_variation_gtm, rhs_variation_hf, FixedPointData};
use raysinger_core::report::SuiteResult;
use raysinger_core::spectral::{
    anomaly_experiment, holonomy_torsion, ray_singer, renormalized_log_torsion, torus_anomaly, Case, CircleConfig,
    CircleModel, LogDetMethod, TorusConfig, TorusModel,
};
use raysinger_core::suite::{self, Context, SuiteConfig};
use raysinger_core::{rng, Scalar};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

fn method(name: &str) -> PyResult<LogDetMethod> {
    match name {
        "spectral" => Ok(LogDetMethod::Spectral),
        "cholesky" => Ok(LogDetMethod::Cholesky),
        _ => Err(err(format!("unknown method {name:?}; expected spectral or cholesky"))),
    }
}

/// Element of the split Clifford algebra on two copies of R^n, with exact
/// coefficients keyed by bitmask (bits 0..n are e_i, bits n..2n are ê_i).
#[pyclass(name = "Clifford", module = "raysinger")]
struct PyClifford {
    inner: raysinger_core::CliffordElement,
}

#[pymethods]
impl PyClifford {
    /// `terms` maps a bitmask to an exact coefficient such as "3/4".
    #[new]
    fn new(n: usize, terms: Vec<(u32, String)>) -> PyResult<Self> {
        let terms = terms
            .into_iter()
            .map(|(k, c)| {
                if k >= 1 << (2 * n) {
                    return Err(err(format!("key {k} out of range for n = {n}")));
                }
                Ok((k, c.parse::<Scalar>().map_err(err)?))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyClifford { inner: Clifford::from_terms(n, terms) })
    }

    #[staticmethod]
    fn random(n: usize, seed: u64, density: f64) -> Self {
        PyClifford { inner: rng::random_clifford(&mut rng::seeded(seed), n, density) }
    }

    /// Supertrace through the Fock representation, as an exact string.
    fn supertrace(&self) -> String {
        supertrace(&self.inner).to_string()
    }

    /// (4π)^{n/2}·Berezin trace of the symbol, as an exact string.
    fn supertrace_via_berezin(&self) -> String {
        supertrace_via_berezin(&self.inner).to_string()
    }

    fn __mul__(&self, o: &PyClifford) -> PyResult<Self> {
        if self.inner.n() != o.inner.n() {
            return Err(err("dimension mismatch"));
        }
        Ok(PyClifford { inner: &self.inner * &o.inner })
    }

    fn __repr__(&self) -> String {
        format!("Clifford({})", self.inner)
    }
}

/// Pf(A/2π) of an antisymmetric matrix with exact entries; returns
/// (exact string, float).
#[pyfunction]
fn euler_of_matrix(matrix: Vec<Vec<String>>) -> PyResult<(String, f64)> {
    let rows = matrix
        .iter()
        .map(|r| r.iter().map(|x| x.parse::<Scalar>()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let top = euler_form(&SkewFormMatrix::from_scalars(&rows).map_err(err)?).map_err(err)?.top_coefficient();
    Ok((top.to_string(), top.to_f64()))
}

/// Fixed-point right-hand side for case "hF" or "gTM" from a JSON list of
/// fixed-point samples.
#[pyfunction]
fn fixed_point_rhs(case: &str, samples_json: &str) -> PyResult<f64> {
    let samples: Vec<FixedPointData> = serde_json::from_str(samples_json).map_err(err)?;
    match case.parse::<Case>().map_err(err)? {
        Case::HF => rhs_variation_hf(&samples),
        Case::GTM => rhs_variation_gtm(&samples),
    }
    .map_err(err)
}

/// Both routes through the fixed-point pipeline on a random sample.
#[pyfunction]
fn pipeline(seed: u64, n0: usize, n1: usize) -> PyResult<(f64, f64)> {
    let d = FixedPointData::random(&mut rng::seeded(seed), n0, n1, 2);
    pipeline_consistency(&d).map_err(err)
}

/// Discrete circle model built from a JSON configuration.
#[pyclass(name = "CircleModel", module = "raysinger")]
struct PyCircleModel {
    inner: CircleModel,
}

#[pymethods]
impl PyCircleModel {
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        let c: CircleConfig = serde_json::from_str(config_json).map_err(err)?;
        Ok(PyCircleModel { inner: CircleModel::new(c).map_err(err)? })
    }

    /// (log τ, log|·|², log‖·‖²) at the unperturbed metrics.
    #[pyo3(signature = (method = "spectral"))]
    fn ray_singer(&self, method: &str) -> PyResult<(f64, f64, f64)> {
        ray_singer(&self.inner.complex(0.0).map_err(err)?, self::method(method)?).map_err(err)
    }

    fn renormalized_log_torsion(&self) -> PyResult<f64> {
        renormalized_log_torsion(&self.inner).map_err(err)
    }

    /// Anomaly experiment record as a dict.
    #[pyo3(signature = (method = "spectral"))]
    fn anomaly<'py>(&self, py: Python<'py>, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = anomaly_experiment(&self.inner, self::method(method)?).map_err(err)?;
        to_py(py, &r)
    }
}

/// Discrete flat torus model built from a JSON configuration.
#[pyclass(name = "TorusModel", module = "raysinger")]
struct PyTorusModel {
    inner: TorusModel,
}

#[pymethods]
impl PyTorusModel {
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        let c: TorusConfig = serde_json::from_str(config_json).map_err(err)?;
        Ok(PyTorusModel { inner: TorusModel::new(c).map_err(err)? })
    }

    #[pyo3(signature = (method = "cholesky"))]
    fn ray_singer(&self, method: &str) -> PyResult<(f64, f64, f64)> {
        ray_singer(&self.inner.complex(0.0).map_err(err)?, self::method(method)?).map_err(err)
    }

    #[pyo3(signature = (method = "cholesky"))]
    fn anomaly<'py>(&self, py: Python<'py>, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = torus_anomaly(&self.inner, self::method(method)?).map_err(err)?;
        to_py(py, &r)
    }
}

/// −½ log|det(1 − e^{iφ})|² for a flat line on the circle.
#[pyfunction(name = "holonomy_torsion")]
fn py_holonomy_torsion(phi: f64) -> f64 {
    holonomy_torsion(phi)
}

/// Runs a named suite; returns a list of suite dicts.
#[pyfunction]
#[pyo3(signature = (name, seed = 42, config_json = None, tolerance_scale = 1.0))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    seed: u64,
    config_json: Option<&str>,
    tolerance_scale: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut ctx = Context::new(seed);
    ctx.tolerance_scale = tolerance_scale;
    if let Some(c) = config_json {
        ctx.config = SuiteConfig::from_json(c).map_err(err)?;
    }
    let (results, _): (Vec<SuiteResult>, _) = py.detach(|| suite::run_suite(name, &ctx)).map_err(err)?;
    to_py(py, &results)
}

#[pymodule]
pub fn raysinger(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClifford>()?;
    m.add_class::<PyCircleModel>()?;
    m.add_class::<PyTorusModel>()?;
    m.add_function(wrap_pyfunction!(euler_of_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(py_holonomy_torsion, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
