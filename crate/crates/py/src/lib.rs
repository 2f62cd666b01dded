//! Python bindings: load a case, solve power flow, simulate, and inspect modes.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use symdae::expr::{render, Expr, RenderStyle};
use symdae::io::{self, BuildOptions, CaseFile};
use symdae::numeric::{JacobianStore, System as CoreSystem};
use symdae::routines::{
    compute_state_matrix, eigen_report, initialize_dynamics, run_tds, solve_power_flow, Event, InitConfig,
    PowerFlowConfig, TdsConfig,
};
use symdae::symbolic::ModelCache;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A parsed case: tables of device rows keyed by model name.
#[pyclass(name = "Case", module = "symdae", frozen)]
struct Case {
    inner: CaseFile,
}

#[pymethods]
impl Case {
    #[getter]
    fn base_mva(&self) -> f64 {
        self.inner.base_mva
    }

    #[getter]
    fn freq(&self) -> f64 {
        self.inner.freq
    }

    /// Number of rows per model.
    fn counts(&self) -> Vec<(String, usize)> {
        self.inner.tables.iter().map(|(k, v)| (k.clone(), v.len())).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        let n: usize = self.inner.tables.values().map(Vec::len).sum();
        format!("Case({} models, {} devices)", self.inner.tables.len(), n)
    }
}

/// Read a JSON case, or a MATPOWER file when the path ends in `.m`.
#[pyfunction]
fn load_case(path: PathBuf) -> PyResult<Case> {
    let inner = if path.extension().is_some_and(|e| e == "m") { io::load_matpower(&path) } else { io::load_case(&path) }
        .map_err(value_err)?;
    Ok(Case { inner })
}

/// Parse case text in the JSON format.
#[pyfunction]
fn parse_case(text: &str) -> PyResult<Case> {
    Ok(Case { inner: CaseFile::parse(text).map_err(value_err)? })
}

/// A numerical system built from a case.
///
/// Call `power_flow`, then `initialize`, before `tds` or `eig`.
#[pyclass(name = "System", module = "symdae", unsendable)]
struct System {
    sys: CoreSystem,
    jac: Option<JacobianStore>,
}

#[pymethods]
impl System {
    #[new]
    #[pyo3(signature = (case, cache_dir = None))]
    fn new(case: &Case, cache_dir: Option<PathBuf>) -> PyResult<Self> {
        let cache = cache_dir.map_or_else(ModelCache::disabled, ModelCache::new);
        let (sys, _) = io::build_system(&case.inner, &cache, BuildOptions::default()).map_err(value_err)?;
        Ok(System { sys, jac: None })
    }

    #[getter]
    fn x_names(&self) -> Vec<String> {
        self.sys.dae.x_names.clone()
    }

    #[getter]
    fn y_names(&self) -> Vec<String> {
        self.sys.dae.y_names.clone()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.sys.dae.x.clone()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.sys.dae.y.clone()
    }

    /// Values of one variable across all devices of a model.
    fn get(&self, model: &str, var: &str) -> PyResult<Vec<f64>> {
        self.sys.var_values(model, var).ok_or_else(|| value_err(format!("no variable {model}.{var}")))
    }

    /// Solve the power flow; returns (converged, iterations, max mismatch).
    #[pyo3(signature = (tol = 1e-8, max_iter = 20, flat_start = false))]
    fn power_flow(&mut self, tol: f64, max_iter: usize, flat_start: bool) -> PyResult<(bool, usize, f64)> {
        let cfg = PowerFlowConfig { tol, max_iter, flat_start, ..Default::default() };
        let r = solve_power_flow(&mut self.sys, &cfg).map_err(runtime_err)?;
        Ok((r.converged, r.iterations, r.residual))
    }

    /// Initialize dynamic devices from the power flow solution.
    #[pyo3(signature = (pq_to_shunt = true))]
    fn initialize(&mut self, pq_to_shunt: bool) -> PyResult<()> {
        let cfg = InitConfig { pq_to_shunt, ..Default::default() };
        self.jac = Some(initialize_dynamics(&mut self.sys, &cfg).map_err(runtime_err)?);
        Ok(())
    }

    /// Run a simulation. Events are strings `toggle:<model>:<idx>:<time>`.
    /// Returns a dict with t, x_names, y_names, x and y (one row per step).
    #[pyo3(signature = (h = 1.0 / 30.0, tmax = 20.0, events = Vec::new(), tol = 1e-8, max_iter = 15))]
    fn tds<'py>(
        &mut self,
        py: Python<'py>,
        h: f64,
        tmax: f64,
        events: Vec<String>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        self.require_init()?;
        let events = events.iter().map(|s| s.parse::<Event>()).collect::<Result<Vec<_>, _>>().map_err(value_err)?;
        let cfg = TdsConfig { h, t_end: tmax, tol, max_iter, events };
        let r = run_tds(&mut self.sys, &cfg).map_err(runtime_err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("t", r.t)?;
        d.set_item("x_names", r.x_names)?;
        d.set_item("y_names", r.y_names)?;
        d.set_item("x", r.x)?;
        d.set_item("y", r.y)?;
        Ok(d)
    }

    /// Eigenvalues of the state matrix as (real, imag, zeta), sorted by zeta.
    fn eig(&mut self) -> PyResult<Vec<(f64, f64, f64)>> {
        self.require_init()?;
        let jac = self.jac.as_mut().expect("checked above");
        let a = compute_state_matrix(&mut self.sys, jac).map_err(runtime_err)?;
        let rep = eigen_report(&a).map_err(runtime_err)?;
        Ok(rep.modes.iter().map(|m| (m.re, m.im, m.zeta)).collect())
    }
}

impl System {
    fn require_init(&self) -> PyResult<()> {
        if self.jac.is_none() {
            return Err(runtime_err("system is not initialized; call power_flow() and initialize() first"));
        }
        Ok(())
    }
}

/// Derivative of an expression with respect to `symbol`, simplified.
#[pyfunction]
fn diff(expr: &str, symbol: &str) -> PyResult<String> {
    let e = Expr::parse(expr).map_err(value_err)?;
    Ok(render(&e.diff(symbol).simplify(), RenderStyle::Plain))
}

#[pyfunction]
fn simplify(expr: &str) -> PyResult<String> {
    let e = Expr::parse(expr).map_err(value_err)?;
    Ok(render(&e.simplify(), RenderStyle::Plain))
}

#[pyfunction]
fn latex(expr: &str) -> PyResult<String> {
    let e = Expr::parse(expr).map_err(value_err)?;
    Ok(render(&e, RenderStyle::Latex))
}

#[pymodule]
#[pyo3(name = "symdae")]
fn symdae_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Case>()?;
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(load_case, m)?)?;
    m.add_function(wrap_pyfunction!(parse_case, m)?)?;
    m.add_function(wrap_pyfunction!(diff, m)?)?;
    m.add_function(wrap_pyfunction!(simplify, m)?)?;
    m.add_function(wrap_pyfunction!(latex, m)?)?;
    Ok(())
}
