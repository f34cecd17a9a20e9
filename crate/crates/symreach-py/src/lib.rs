use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use symreach_core::abstraction::construct_virtual_model;
use symreach_core::cli::run::{equivariance_for, fsr_for, ns_baseline};
use symreach_core::cli::scenario::{parse_map, parse_method};
use symreach_core::cli::{load_scenario, parse_scenario, run_scenario};
use symreach_core::reach::Method;
use symreach_core::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Hand a JSON value to Python as plain dicts and lists.
fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

/// A validated scenario file.
#[pyclass(name = "Scenario", module = "symreach")]
struct PyScenario {
    inner: symreach_core::cli::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: load_scenario(path).map_err(py_err)? })
    }

    /// Parse scenario text; `constants` files resolve against `base`.
    #[staticmethod]
    #[pyo3(signature = (text, base=None))]
    fn parse(text: &str, base: Option<PathBuf>) -> PyResult<Self> {
        Ok(Self { inner: parse_scenario(text, base.as_deref()).map_err(py_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n_roads(&self) -> usize {
        self.inner.roads.len()
    }

    /// Run one method and return the report as a dict. The error column is
    /// filled when the NS baseline is cheap enough to compute.
    #[pyo3(signature = (method="sv", map=None, out=None))]
    fn run(&self, py: Python<'_>, method: &str, map: Option<&str>, out: Option<PathBuf>) -> PyResult<Py<PyAny>> {
        let method = parse_method(method).map_err(py_err)?;
        let map = map.map(parse_map).transpose().map_err(py_err)?;
        let s = &self.inner;
        let report = py
            .detach(|| {
                let base = if method == Method::NS { None } else { ns_baseline(s)? };
                run_scenario(s, method, map, out.as_deref(), base.as_deref())
            })
            .map_err(py_err)?;
        to_py(py, &serde_json::to_value(&report).expect("report serialises"))
    }

    /// The virtual automaton under `map` (default: the scenario's map).
    #[pyo3(signature = (map=None))]
    fn virtual_model(&self, py: Python<'_>, map: Option<&str>) -> PyResult<Py<PyAny>> {
        let kind = map.map(parse_map).transpose().map_err(py_err)?.unwrap_or(self.inner.map);
        let b = self.inner.build().map_err(py_err)?;
        let phi = self.inner.virtual_map(kind).map_err(py_err)?;
        let va = construct_virtual_model(&b.automaton, &phi).map_err(py_err)?;
        to_py(py, &va.dump_json())
    }

    /// Largest equivariance residual over random samples.
    #[pyo3(signature = (map=None, samples=1000, seed=0))]
    fn check_equivariance(&self, map: Option<&str>, samples: usize, seed: u64) -> PyResult<f64> {
        let kind = map.map(parse_map).transpose().map_err(py_err)?.unwrap_or(self.inner.map);
        equivariance_for(&self.inner, kind, samples, seed).map_err(py_err)
    }

    #[pyo3(signature = (map=None, samples=50, seed=0, jmax=16))]
    fn check_fsr(&self, py: Python<'_>, map: Option<&str>, samples: usize, seed: u64, jmax: usize) -> PyResult<Py<PyAny>> {
        let kind = map.map(parse_map).transpose().map_err(py_err)?.unwrap_or(self.inner.map);
        let s = &self.inner;
        let r = py.detach(|| fsr_for(s, kind, samples, seed, jmax)).map_err(py_err)?;
        to_py(py, &serde_json::to_value(&r).expect("report serialises"))
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?}, roads={})", self.inner.name, self.inner.roads.len())
    }
}

#[pyfunction]
fn load(path: PathBuf) -> PyResult<PyScenario> {
    PyScenario::load(path)
}

#[pymodule]
#[pyo3(name = "symreach")]
fn symreach_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
