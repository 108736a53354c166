//! Python bindings: grids, signals, regularizer families, lower-level solves,
//! learning, the spectral closed forms and the demos.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

use bilevel_core::bilevel::{self as core_bilevel, ParamGrid};
use bilevel_core::io::{self, demos};
use bilevel_core::regularizers::{BaseRegularizer, DoubleIntegrand, PhiSpec, RhoSpec};
use bilevel_core::solvers::{self, SolverConfig};
use bilevel_core::{grid, spectral, Error, ExtendedParam, FamilySpec, TrainingSet};

fn to_py(e: Error) -> PyErr {
    match io::exit_code(&e) {
        io::EXIT_SOLVER => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: String) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn to_json<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, s)
}

/// `float`, or one of `"lower"`, `"upper"`, `"inf"`.
fn param_of(obj: &Bound<'_, PyAny>) -> PyResult<ExtendedParam> {
    if let Ok(s) = obj.cast::<PyString>() {
        return match s.to_str()? {
            "lower" | "lower_edge" => Ok(ExtendedParam::LowerEdge),
            "upper" | "upper_edge" | "inf" => Ok(ExtendedParam::UpperEdge),
            other => Err(PyValueError::new_err(format!("bad parameter `{other}`"))),
        };
    }
    let t: f64 = obj.extract()?;
    Ok(if t.is_infinite() && t > 0.0 { ExtendedParam::UpperEdge } else { ExtendedParam::Interior(t) })
}

fn param_to_py(py: Python<'_>, p: ExtendedParam) -> PyResult<Py<PyAny>> {
    Ok(match p {
        ExtendedParam::LowerEdge => "lower".into_pyobject(py)?.into_any().unbind(),
        ExtendedParam::UpperEdge => "upper".into_pyobject(py)?.into_any().unbind(),
        ExtendedParam::Interior(t) => t.into_pyobject(py)?.into_any().unbind(),
    })
}

#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrid(Arc<grid::Grid>);

#[pymethods]
impl PyGrid {
    #[staticmethod]
    fn interval(a: f64, b: f64, points: usize) -> PyResult<Self> {
        grid::Grid::interval(a, b, points).map(PyGrid).map_err(to_py)
    }

    #[staticmethod]
    fn square(a: f64, b: f64, points_per_axis: usize) -> PyResult<Self> {
        grid::Grid::square(a, b, points_per_axis).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn points_per_axis(&self) -> usize {
        self.0.points_per_axis()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Node coordinates; 1D nodes are returned as floats.
    fn nodes(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        if self.0.dim() == 1 {
            Ok(self.0.nodes().iter().map(|x| x[0]).collect::<Vec<_>>().into_pyobject(py)?.into_any().unbind())
        } else {
            Ok(self.0.nodes().iter().map(|x| (x[0], x[1])).collect::<Vec<_>>().into_pyobject(py)?.into_any().unbind())
        }
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={}, points_per_axis={}, domain={:?})", self.0.dim(), self.0.points_per_axis(), self.0.domain())
    }
}

#[pyclass(name = "Signal", frozen, from_py_object)]
#[derive(Clone)]
struct PySignal(grid::GridSignal);

#[pymethods]
impl PySignal {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        grid::GridSignal::new(&grid.0, values).map(PySignal).map_err(to_py)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn l2_norm_sq(&self) -> f64 {
        grid::l2_norm_sq(&self.0)
    }

    fn tv(&self) -> f64 {
        grid::tv_discrete(&self.0)
    }

    fn lipschitz_constant(&self) -> f64 {
        grid::lipschitz_constant(&self.0)
    }

    fn l2_dist_sq(&self, other: &PySignal) -> PyResult<f64> {
        grid::l2_dist_sq(&self.0, &other.0).map_err(to_py)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        io::read_signal(std::path::Path::new(path), None).map(PySignal).map_err(to_py)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_signal(&self.0, std::path::Path::new(path)).map_err(to_py)
    }
}

#[pyclass(name = "Family", frozen, from_py_object)]
#[derive(Clone)]
struct PyFamily(FamilySpec);

#[pymethods]
impl PyFamily {
    /// Same JSON form as the `family` entry of a run configuration.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let f: FamilySpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        f.validate().map_err(to_py)?;
        Ok(PyFamily(f))
    }

    #[staticmethod]
    fn weight_tv() -> Self {
        PyFamily(FamilySpec::Weight { base: BaseRegularizer::Tv })
    }

    #[staticmethod]
    fn weight_l2() -> Self {
        PyFamily(FamilySpec::Weight { base: BaseRegularizer::QuadraticL2 })
    }

    #[staticmethod]
    #[pyo3(signature = (b = 1.0))]
    fn lipschitz_exponent(b: f64) -> PyResult<Self> {
        Ok(PyFamily(FamilySpec::Exponent { integrand: DoubleIntegrand::diff_quotient(b).map_err(to_py)? }))
    }

    #[staticmethod]
    #[pyo3(signature = (c = 1.0))]
    fn abs_diff_exponent(c: f64) -> PyResult<Self> {
        Ok(PyFamily(FamilySpec::Exponent { integrand: DoubleIntegrand::abs_diff(c).map_err(to_py)? }))
    }

    #[staticmethod]
    #[pyo3(signature = (dim = 1))]
    fn brezis_nguyen(dim: usize) -> PyResult<Self> {
        Ok(PyFamily(FamilySpec::BrezisNguyen { phi: PhiSpec::quad_cap(dim).map_err(to_py)?, k_phi: None }))
    }

    #[staticmethod]
    #[pyo3(signature = (dim = 1))]
    fn aubert_kornprobst(dim: usize) -> PyResult<Self> {
        Ok(PyFamily(FamilySpec::AubertKornprobst { rho: RhoSpec::unit_ball(dim).map_err(to_py)? }))
    }

    #[staticmethod]
    #[pyo3(signature = (mu, m_max = 64))]
    fn spectral(mu: f64, m_max: usize) -> PyResult<Self> {
        let f = FamilySpec::SpectralFractional { mu, m_max };
        f.validate().map_err(to_py)?;
        Ok(PyFamily(f))
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    /// `R_λ(u)`, with the edge models at `"lower"`/`"upper"`.
    fn evaluate(&self, param: &Bound<'_, PyAny>, u: &PySignal) -> PyResult<f64> {
        self.0.evaluate(param_of(param)?, &u.0).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Family({})", self.0.name())
    }
}

fn training(clean: Vec<PySignal>, noisy: Vec<PySignal>) -> PyResult<TrainingSet> {
    if clean.len() != noisy.len() {
        return Err(PyValueError::new_err("clean and noisy lists differ in length"));
    }
    TrainingSet::new(clean.into_iter().zip(noisy).map(|(c, n)| (c.0, n.0)).collect()).map_err(to_py)
}

fn solver_config(tol: Option<f64>, max_iters: Option<usize>) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    cfg
}

/// Lower-level reconstruction; returns `(signal, info)`.
#[pyfunction]
#[pyo3(signature = (family, param, noisy, tol = None, max_iters = None))]
fn solve(
    py: Python<'_>,
    family: &PyFamily,
    param: &Bound<'_, PyAny>,
    noisy: &PySignal,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> PyResult<(PySignal, Py<PyAny>)> {
    let p = param_of(param)?;
    let cfg = solver_config(tol, max_iters);
    let r = py.detach(|| solvers::solve(&family.0, p, &noisy.0, &cfg)).map_err(to_py)?;
    let info = serde_json::json!({
        "objective": r.objective,
        "method": r.method,
        "iterations": r.iterations,
        "residual": r.residual,
        "converged": r.converged,
        "possibly_nonunique": r.possibly_nonunique,
        "certificate_gap": r.certificate_gap,
    });
    Ok((PySignal(r.minimizer), to_json(py, &info)?))
}

/// `Ī(λ)` on the training pairs.
#[pyfunction]
fn upper_value(family: &PyFamily, param: &Bound<'_, PyAny>, clean: Vec<PySignal>, noisy: Vec<PySignal>) -> PyResult<f64> {
    let p = param_of(param)?;
    let t = training(clean, noisy)?;
    let py = param.py();
    py.detach(|| core_bilevel::extended_upper(&family.0, p, &t, &SolverConfig::default()))
        .map(|e| e.i_bar)
        .map_err(to_py)
}

/// Grid search plus refinement; returns the report as a dict with an extra `structure` entry.
#[pyfunction]
#[pyo3(signature = (family, clean, noisy, param_grid = None, refine_iters = 20))]
fn learn(
    py: Python<'_>,
    family: &PyFamily,
    clean: Vec<PySignal>,
    noisy: Vec<PySignal>,
    param_grid: Option<&str>,
    refine_iters: usize,
) -> PyResult<Py<PyAny>> {
    let t = training(clean, noisy)?;
    let g = match param_grid {
        Some(s) => s.parse::<ParamGrid>().map_err(to_py)?,
        None => ParamGrid::default_for(&family.0),
    };
    let report = py
        .detach(|| core_bilevel::learn(&family.0, &t, &g, refine_iters, &SolverConfig::default()))
        .map_err(to_py)?;
    let structure = core_bilevel::structure_report(&report);
    to_json(py, &serde_json::json!({ "report": report, "structure": structure }))
}

/// Data conditions of the family, as `{name: {"value": v, "holds": b}}`.
#[pyfunction]
fn conditions(py: Python<'_>, family: &PyFamily, clean: Vec<PySignal>, noisy: Vec<PySignal>) -> PyResult<Py<PyAny>> {
    let t = training(clean, noisy)?;
    let m = core_bilevel::default_conditions(&family.0, &t, &SolverConfig::default()).map_err(to_py)?;
    to_json(py, &m)
}

/// Two-mode spectral pair on `(0, π)²`: returns `(clean, noisy)`.
#[pyfunction]
#[pyo3(signature = (points = 32, m_max = 10))]
fn two_mode_example(points: usize, m_max: usize) -> PyResult<(PySignal, PySignal)> {
    let (t, _) = spectral::two_mode_example(points, m_max).map_err(to_py)?;
    let (c, n) = t.pairs()[0].clone();
    Ok((PySignal(c), PySignal(n)))
}

fn spectral_data(clean: Vec<PySignal>, noisy: Vec<PySignal>, m_max: usize) -> PyResult<spectral::SpectralData> {
    let t = training(clean, noisy)?;
    let cap = t.grid().points_per_axis().saturating_sub(1);
    let basis = Arc::new(spectral::build_basis(t.grid(), m_max.min(cap)).map_err(to_py)?);
    spectral::SpectralData::new(&t, &basis).map_err(to_py)
}

/// `(μ₋, μ₊)` for the spectral family.
#[pyfunction]
#[pyo3(signature = (clean, noisy, m_max = 64, lo = 1e-4, hi = 1.0))]
fn mu_window(clean: Vec<PySignal>, noisy: Vec<PySignal>, m_max: usize, lo: f64, hi: f64) -> PyResult<(f64, f64)> {
    let d = spectral_data(clean, noisy, m_max)?;
    spectral::mu_window_data(&d, (lo, hi)).map_err(to_py)
}

/// Optimal `s` for a given `μ`: returns `(s_hat, value, boundary)`.
#[pyfunction]
#[pyo3(signature = (clean, noisy, mu, m_max = 64))]
fn learn_s(clean: Vec<PySignal>, noisy: Vec<PySignal>, mu: f64, m_max: usize) -> PyResult<(f64, f64, bool)> {
    let d = spectral_data(clean, noisy, m_max)?;
    let r = spectral::learn_s_data(&d, mu);
    Ok((r.s_hat, r.value, r.boundary))
}

/// Runs a built-in demo; returns its report as a dict.
#[pyfunction]
fn run_demo(py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| demos::run_demo(name, &SolverConfig::default())).map_err(to_py)?;
    to_json(py, &r)
}

/// A built-in dataset as `(clean, noisy)`.
#[pyfunction]
fn builtin_dataset(name: &str) -> PyResult<(PySignal, PySignal)> {
    let t = demos::builtin_dataset(name).map_err(to_py)?;
    let (c, n) = t.pairs()[0].clone();
    Ok((PySignal(c), PySignal(n)))
}

#[pyfunction]
fn param_label(py: Python<'_>, param: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    param_to_py(py, param_of(param)?)
}

#[pymodule]
fn bilevel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySignal>()?;
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(upper_value, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(conditions, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_example, m)?)?;
    m.add_function(wrap_pyfunction!(mu_window, m)?)?;
    m.add_function(wrap_pyfunction!(learn_s, m)?)?;
    m.add_function(wrap_pyfunction!(run_demo, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(param_label, m)?)?;
    m.add("REPORT_SCHEMA", io::REPORT_SCHEMA)?;
    Ok(())
}
