//! Python bindings. Scenarios cross the boundary as configuration text, so
//! every key documented for the CLI is available from Python as well.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dim::erlang::{self, ErlangSystem};
use dim::sweep::{self, Axis};
use dim::{Bundle, Mode, Morphology};

fn to_py(e: dim::Error) -> PyErr {
    match e {
        dim::Error::Parse { .. } | dim::Error::Invalid(_) | dim::Error::Io { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(to_py)
}

/// Complete parameter set of one evaluation case.
#[pyclass(name = "Bundle", module = "celldim", skip_from_py_object)]
#[derive(Clone)]
struct PyBundle {
    inner: Bundle,
}

#[pymethods]
impl PyBundle {
    /// Built-in "rural" or "urban" scenario.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let m: Morphology = name.parse().map_err(to_py)?;
        Ok(Self { inner: Bundle::preset(m) })
    }

    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Ok(Self { inner: dim::parse_config(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: dim::load_scenario(path).map_err(to_py)? })
    }

    fn to_config(&self) -> String {
        self.inner.to_config_string()
    }

    /// Copy with one axis value changed: isd_m, penetration,
    /// extra_programs or rx_antennas.
    fn with_axis(&self, axis: &str, value: f64) -> PyResult<Self> {
        let a = axis_from(axis)?;
        let b = a.apply(&self.inner, value);
        b.validate().map_err(to_py)?;
        Ok(Self { inner: b })
    }

    #[getter]
    fn isd(&self) -> f64 {
        self.inner.scenario.isd
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.numerics.samples
    }

    #[setter]
    fn set_samples(&mut self, n: usize) -> PyResult<()> {
        if n == 0 {
            return Err(PyValueError::new_err("samples must be positive"));
        }
        self.inner.numerics.samples = n;
        Ok(())
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.scenario;
        format!(
            "Bundle({}, isd={} m, {}x{})",
            format!("{:?}", s.morphology).to_lowercase(),
            s.isd,
            s.bs_antenna_count,
            s.rx_antenna_count
        )
    }
}

fn axis_from(name: &str) -> PyResult<Axis> {
    [Axis::Isd, Axis::Penetration, Axis::ExtraPrograms, Axis::Antennas]
        .into_iter()
        .find(|a| a.as_str() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown axis '{name}'")))
}

fn result_dict<'py>(py: Python<'py>, r: &dim::DimensioningResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mode", r.mode.as_str())?;
    d.set_item("bw_national_sfn", r.bw_national_sfn)?;
    d.set_item("bw_regional_sfn", r.bw_regional_sfn)?;
    d.set_item("bw_unicast", r.bw_unicast)?;
    d.set_item("bw_required", r.bw_required)?;
    d.set_item("bw_saving", r.bw_saving)?;
    d.set_item("infeasible", r.infeasible)?;
    let g = &r.diagnostics;
    d.set_item("sinr_1pct_national_db", g.sinr_1pct_national_db)?;
    d.set_item("sinr_1pct_regional_db", g.sinr_1pct_regional_db)?;
    d.set_item("load_x", g.load_x)?;
    d.set_item("blocking", g.aggregate_blocking)?;
    Ok(d)
}

/// Spectrum requirement of one scenario as a dict of MHz values and
/// diagnostics. `mode` is "broadcast" or "hybrid".
#[pyfunction]
#[pyo3(signature = (bundle, mode = "hybrid", seed = 1))]
fn dimension<'py>(py: Python<'py>, bundle: &PyBundle, mode: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let mode = parse_mode(mode)?;
    let b = bundle.inner.clone();
    let r = py.detach(move || dim::dimension(&b, mode, seed)).map_err(to_py)?;
    result_dict(py, &r)
}

/// Run a sweep over one axis and return the CSV text.
#[pyfunction]
#[pyo3(signature = (bundle, axis, values, mode = "hybrid", seed = 1))]
fn sweep_csv(
    bundle: &PyBundle,
    axis: &str,
    values: Vec<f64>,
    mode: &str,
    seed: u64,
    py: Python<'_>,
) -> PyResult<String> {
    let axis = axis_from(axis)?;
    let mode = parse_mode(mode)?;
    let b = bundle.inner.clone();
    let rows = py.detach(move || sweep::sweep(axis, &values, &b, mode, seed)).map_err(to_py)?;
    Ok(sweep::to_csv(&rows))
}

/// Named sweep (fig5..fig9) as CSV text.
#[pyfunction]
#[pyo3(signature = (name, seed = 1, samples = None))]
fn preset_sweep_csv(py: Python<'_>, name: &str, seed: u64, samples: Option<usize>) -> PyResult<String> {
    let points = sweep::preset_points(name, |b| {
        if let Some(n) = samples {
            b.numerics.samples = n;
        }
    })
    .map_err(to_py)?;
    let rows = py.detach(move || sweep::run_sweep(&points, seed));
    Ok(sweep::to_csv(&rows))
}

/// Sorted SINR samples (dB) of the national (or regional) SFN.
#[pyfunction]
#[pyo3(signature = (bundle, seed = 1, regional = false))]
fn sfn_sinr_db(py: Python<'_>, bundle: &PyBundle, seed: u64, regional: bool) -> Vec<f64> {
    let b = bundle.inner.clone();
    let (nat, reg) = py.detach(move || dim::dimensioning::sfn_distributions(&b, seed, !regional));
    nat.unwrap_or(reg).samples.iter().map(|&s| dim::propagation::linear_to_db(s)).collect()
}

fn system_from(classes: &[(u32, f64)], capacity: u32) -> ErlangSystem {
    ErlangSystem {
        unit: 1.0,
        classes: classes.iter().map(|&(b_units, rho)| erlang::ErlangClass { b_units, rho }).collect(),
        capacity,
    }
}

/// Blocking of a multi-rate loss system given `(units, erlangs)` pairs.
/// Returns `(per_class, traffic_weighted_aggregate)`.
#[pyfunction]
fn kaufman_roberts(classes: Vec<(u32, f64)>, capacity: u32) -> PyResult<(Vec<f64>, f64)> {
    let b = erlang::kaufman_roberts(&system_from(&classes, capacity)).map_err(to_py)?;
    Ok((b.per_class, b.aggregate))
}

/// Smallest bandwidth (MHz, multiple of `unit`) whose aggregate blocking
/// is at most `target`, for `(b_mhz, erlangs)` pairs.
#[pyfunction]
#[pyo3(signature = (classes, target = 1e-3, unit = 0.1))]
fn min_bandwidth(classes: Vec<(f64, f64)>, target: f64, unit: f64) -> PyResult<f64> {
    erlang::min_bandwidth(&classes, target, unit).map_err(to_py)
}

/// Occupancy-process simulation of the same loss system.
#[pyfunction]
#[pyo3(signature = (classes, capacity, events = 1_000_000, seed = 1))]
fn simulate_blocking(classes: Vec<(u32, f64)>, capacity: u32, events: u64, seed: u64) -> (Vec<f64>, f64) {
    let b = erlang::mc_blocking_oracle(&system_from(&classes, capacity), events, seed);
    (b.per_class, b.aggregate)
}

/// 320 MHz minus the requirement.
#[pyfunction]
fn spectrum_saving(bw_required: f64) -> f64 {
    dim::spectrum_saving(bw_required)
}

#[pymodule]
#[pyo3(name = "celldim")]
fn celldim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBundle>()?;
    m.add_function(wrap_pyfunction!(dimension, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(preset_sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(sfn_sinr_db, m)?)?;
    m.add_function(wrap_pyfunction!(kaufman_roberts, m)?)?;
    m.add_function(wrap_pyfunction!(min_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_blocking, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_saving, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
