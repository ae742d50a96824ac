//! Python bindings. Structured results cross the boundary as plain dicts,
//! built from the same serde representation the CLI writes to disk.

use std::path::PathBuf;

use hjselect::flow::{run_flow_study, FlowStudyConfig};
use hjselect::front_tracking::{
    build_counterexample_with, entropy_report, BuildMode, CounterexampleConfig, FrontTrackedSolution,
};
use hjselect::regularity::regularity_report;
use hjselect::report::{exit_kind, run_subcommand, ExitKind, Params};
use hjselect::viscosity::{godunov_run, GodunovConfig};
use hjselect::{GridSolution, PiecewiseCubicFlux, PiecewiseLinearProfile};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(hjselect_py, NumericalError, PyException);
create_exception!(hjselect_py, CertificateNotFound, PyException);

fn err(e: hjselect::Error) -> PyErr {
    let msg = e.to_string();
    match exit_kind(&e) {
        ExitKind::Config => PyValueError::new_err(msg),
        ExitKind::CertificateNotFound => CertificateNotFound::new_err(msg),
        ExitKind::Io => pyo3::exceptions::PyOSError::new_err(msg),
        _ => NumericalError::new_err(msg),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| NumericalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "Flux", module = "hjselect_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Flux(PiecewiseCubicFlux);

#[pymethods]
impl Flux {
    #[staticmethod]
    fn paper() -> Self {
        Flux(PiecewiseCubicFlux::paper())
    }

    #[staticmethod]
    fn quadratic() -> Self {
        Flux(PiecewiseCubicFlux::quadratic())
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        PiecewiseCubicFlux::from_json_str(s).map(Flux).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    fn value(&self, p: f64) -> f64 {
        self.0.value(p)
    }

    fn deriv(&self, p: f64) -> f64 {
        self.0.deriv(p)
    }

    fn second_deriv(&self, p: f64) -> f64 {
        self.0.second_deriv(p)
    }

    fn tangent_gap(&self, p: f64, q: f64) -> f64 {
        self.0.tangent_gap(p, q)
    }

    fn convexity_report<'py>(&self, py: Python<'py>, lo: f64, hi: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.convexity_report(lo, hi).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("Flux({} segments)", self.0.segments.len())
    }
}

#[pyclass(name = "Profile", module = "hjselect_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Profile(PiecewiseLinearProfile);

#[pymethods]
impl Profile {
    #[new]
    fn new(knots: Vec<f64>, values: Vec<f64>, left: f64, right: f64) -> PyResult<Self> {
        PiecewiseLinearProfile::new(knots, values, left, right)
            .map(Profile)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (l = 711.0 / 44.0))]
    fn counterexample(l: f64) -> PyResult<Self> {
        PiecewiseLinearProfile::counterexample(l).map(Profile).map_err(err)
    }

    fn value(&self, x: f64) -> f64 {
        self.0.value(x)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        self.0.integral(a, b)
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.0.knots.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }
}

/// Nodal or cell-average grid; rows are times.
#[pyclass(name = "Grid", module = "hjselect_py", frozen)]
struct Grid(GridSolution);

#[pymethods]
impl Grid {
    #[getter]
    fn x_min(&self) -> f64 {
        self.0.x_min
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx
    }

    #[getter]
    fn t_min(&self) -> f64 {
        self.0.t_min
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.nt(), self.0.nx())
    }

    fn xs(&self) -> Vec<f64> {
        self.0.xs()
    }

    fn row(&self, k: usize) -> PyResult<Vec<f64>> {
        if k >= self.0.nt() {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "row {k} of {}",
                self.0.nt()
            )));
        }
        Ok(self.0.row(k).to_vec())
    }

    fn values(&self) -> Vec<Vec<f64>> {
        self.0.values.clone()
    }
}

#[pyclass(name = "Counterexample", module = "hjselect_py", frozen)]
struct Counterexample(FrontTrackedSolution);

#[pymethods]
impl Counterexample {
    /// Builds the tracked weak solution; `mode` is `paper` or `detect`.
    #[new]
    #[pyo3(signature = (mode = "paper", dt = 1e-3, t_end = 120.0))]
    fn new(py: Python<'_>, mode: &str, dt: f64, t_end: f64) -> PyResult<Self> {
        let mode: BuildMode = mode.parse().map_err(err)?;
        let cfg = CounterexampleConfig::new(mode, dt).with_t_end(t_end);
        py.detach(|| build_counterexample_with(&cfg))
            .map(Counterexample)
            .map_err(err)
    }

    fn eval(&self, t: f64, x: f64) -> PyResult<f64> {
        self.0.eval(t, x).map_err(err)
    }

    fn eval_row(&self, t: f64, xs: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.eval_row(t, &xs).map_err(err)
    }

    #[getter]
    fn flux(&self) -> Flux {
        Flux(self.0.flux.clone())
    }

    #[getter]
    fn initial_profile(&self) -> Profile {
        Profile(self.0.v0.clone())
    }

    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.derived_constants)
    }

    fn shocks<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.shocks)
    }

    fn rh_residual(&self) -> f64 {
        self.0.rh_residual()
    }

    /// Onset certificate and the fixed-level witness.
    #[pyo3(signature = (dt_scan = 0.05, n_k = 2001))]
    fn entropy_report<'py>(&self, py: Python<'py>, dt_scan: f64, n_k: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| entropy_report(&self.0, dt_scan, n_k)).map_err(err)?;
        to_py(py, &r)
    }

    /// Nodal potential `u = -int v` on `nx + 1` faces from `x_min`.
    #[pyo3(signature = (x_min, dx, nx, t_min, dt, nt, sub = 2))]
    #[allow(clippy::too_many_arguments)]
    fn potential_grid(
        &self,
        py: Python<'_>,
        x_min: f64,
        dx: f64,
        nx: usize,
        t_min: f64,
        dt: f64,
        nt: usize,
        sub: usize,
    ) -> PyResult<Grid> {
        py.detach(|| self.0.potential_grid(x_min, dx, nx, t_min, dt, nt, sub))
            .map(Grid)
            .map_err(err)
    }

    /// Regularity estimates of the potential, with shock tubes of `radius`
    /// excluded from the residual.
    #[pyo3(signature = (x_min, dx, nx, t_min, dt, nt, radius = None))]
    #[allow(clippy::too_many_arguments)]
    fn regularity<'py>(
        &self,
        py: Python<'py>,
        x_min: f64,
        dx: f64,
        nx: usize,
        t_min: f64,
        dt: f64,
        nt: usize,
        radius: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = py
            .detach(|| {
                let g = self.0.potential_grid(x_min, dx, nx, t_min, dt, nt, 2)?;
                regularity_report(&g, &self.0.flux, &self.0.shocks, radius.unwrap_or(3.0 * dx))
            })
            .map_err(err)?;
        to_py(py, &r)
    }

    /// Mollified-flow study on this solution's potential.
    #[pyo3(signature = (epsilons, starts, t_max = 0.5))]
    fn flow_study<'py>(
        &self,
        py: Python<'py>,
        epsilons: Vec<f64>,
        starts: Vec<f64>,
        t_max: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cfg = FlowStudyConfig::new(epsilons, starts, t_max);
        let s = py.detach(|| run_flow_study(&self.0, &cfg)).map_err(err)?;
        to_py(py, &s)
    }
}

/// Godunov entropy solution of `v_t + H(v)_x = 0`; returns the cell grid and
/// the mass ledger.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (flux, profile, x_min, x_max, t_max, cells, stored_intervals = None))]
fn godunov<'py>(
    py: Python<'py>,
    flux: &Flux,
    profile: &Profile,
    x_min: f64,
    x_max: f64,
    t_max: f64,
    cells: usize,
    stored_intervals: Option<usize>,
) -> PyResult<(Grid, Bound<'py, PyDict>)> {
    let cfg = GodunovConfig::new((x_min, x_max), t_max, cells).with_stored_intervals(stored_intervals);
    let run = py.detach(|| godunov_run(&flux.0, &profile.0, &cfg)).map_err(err)?;
    let ledger = PyDict::new(py);
    ledger.set_item("initial_mass", run.ledger.initial_mass)?;
    ledger.set_item("final_mass", run.ledger.final_mass)?;
    ledger.set_item("boundary_transfer", run.ledger.boundary_transfer)?;
    ledger.set_item("relative_error", run.ledger.relative_error)?;
    Ok((Grid(run.grid), ledger))
}

/// Runs a CLI subcommand with flat parameters and returns `(exit_code,
/// output_path)`; failures raise.
#[pyfunction]
#[pyo3(signature = (subcommand, out, params = None))]
fn run(py: Python<'_>, subcommand: &str, out: PathBuf, params: Option<&Bound<'_, PyDict>>) -> PyResult<(i32, PathBuf)> {
    let text = match params {
        Some(d) => py.import("json")?.call_method1("dumps", (d,))?.extract::<String>()?,
        None => "{}".to_string(),
    };
    let p = Params::from_config_str(&text).map_err(err)?;
    let o = py.detach(|| run_subcommand(subcommand, p, &out)).map_err(err)?;
    Ok((o.exit.code(), o.path))
}

#[pymodule]
fn hjselect_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Flux>()?;
    m.add_class::<Profile>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Counterexample>()?;
    m.add_function(wrap_pyfunction!(godunov, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("CertificateNotFound", m.py().get_type::<CertificateNotFound>())?;
    Ok(())
}
