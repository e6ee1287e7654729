//! Python bindings: environments, colorings, event detection, estimators and
//! config-driven experiment runs.

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use vperc_core::coloring::Coloring as CoreColoring;
use vperc_core::estimate::{estimate_annealed, estimate_quenched_moments, McParams};
use vperc_core::events::{self, EventSpec};
use vperc_core::experiment::{self, ExperimentConfig, RunError, Suite};
use vperc_core::geom::dump::ComplexDump;
use vperc_core::geom::{self, build_complex, Point, PointSet, RegionSpec, VoronoiComplex, Window};
use vperc_core::{Error, SeedPath};

fn err(e: Error) -> PyErr {
    match e {
        Error::Parameter { .. } => PyValueError::new_err(e.to_string()),
        Error::Index { .. } => PyIndexError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn run_err(e: RunError) -> PyErr {
    let text = e.to_json().to_string();
    match e.exit_code() {
        2 => PyValueError::new_err(text),
        _ => PyRuntimeError::new_err(text),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn json_of<T: serde::Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

fn window(w: (f64, f64, f64, f64)) -> PyResult<Window> {
    Window::new(w.0, w.1, w.2, w.3).map_err(err)
}

/// A Poisson (or given) point set and its Voronoi complex.
#[pyclass(module = "vperc", frozen)]
struct Complex {
    points: PointSet,
    complex: VoronoiComplex,
}

#[pymethods]
impl Complex {
    /// Poisson environment of `intensity` in `window = (xmin, ymin, xmax, ymax)`.
    #[staticmethod]
    fn sample(window_: (f64, f64, f64, f64), intensity: f64, seed: u64) -> PyResult<Self> {
        let points = geom::sample_poisson(window(window_)?, intensity, &SeedPath::root(seed)).map_err(err)?;
        let complex = build_complex(&points).map_err(err)?;
        Ok(Self { points, complex })
    }

    #[staticmethod]
    fn from_points(points: Vec<(f64, f64)>, window_: (f64, f64, f64, f64)) -> PyResult<Self> {
        let pts = points.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let points = PointSet::from_points(pts, window(window_)?).map_err(err)?;
        let complex = build_complex(&points).map_err(err)?;
        Ok(Self { points, complex })
    }

    fn __len__(&self) -> usize {
        self.complex.len()
    }

    #[getter]
    fn nuclei(&self) -> Vec<(f64, f64)> {
        self.complex.nuclei().iter().map(|p| (p.x, p.y)).collect()
    }

    #[getter]
    fn triangles(&self) -> Vec<[u32; 3]> {
        self.complex.triangles().to_vec()
    }

    fn neighbors(&self, i: usize) -> PyResult<Vec<u32>> {
        self.complex.check_index(i).map_err(err)?;
        Ok(self.complex.neighbors(i).to_vec())
    }

    fn polygon(&self, i: usize) -> PyResult<Vec<(f64, f64)>> {
        self.complex.check_index(i).map_err(err)?;
        Ok(self.complex.polygon(i).iter().map(|p| (p.x, p.y)).collect())
    }

    fn boundary_flag(&self, i: usize) -> PyResult<bool> {
        self.complex.check_index(i).map_err(err)?;
        Ok(self.complex.boundary_flag(i))
    }

    /// Window, nuclei, sorted adjacency, polygons and boundary flags.
    fn dump(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        json_of(py, &ComplexDump::new(&self.complex))
    }
}

#[pyclass(module = "vperc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Coloring {
    inner: CoreColoring,
}

#[pymethods]
impl Coloring {
    #[staticmethod]
    fn sample(n: usize, p: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreColoring::sample(n, p, &SeedPath::root(seed)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn constant(n: usize, black: bool) -> Self {
        Self {
            inner: CoreColoring::constant(n, black),
        }
    }

    /// Signs `+1` (black) and `-1` (white).
    #[staticmethod]
    fn from_signs(signs: Vec<i8>, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreColoring::from_signs(signs, p).map_err(err)?,
        })
    }

    #[getter]
    fn signs(&self) -> Vec<i8> {
        self.inner.signs().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn is_black(&self, cell: usize) -> PyResult<bool> {
        if cell >= self.inner.len() {
            return Err(err(Error::Index { index: cell, len: self.inner.len() }));
        }
        Ok(self.inner.is_black(cell))
    }

    fn flip(&self, cell: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.flip(cell).map_err(err)?,
        })
    }

    fn inverted(&self) -> Self {
        Self {
            inner: self.inner.inverted(),
        }
    }
}

/// An event specification, as in experiment configs.
#[pyclass(module = "vperc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Event {
    spec: EventSpec,
}

fn annulus_kind(kind: &str, r: f64, big_r: f64, orientation: u8) -> PyResult<RegionSpec> {
    let center = Point::default();
    Ok(match kind {
        "annulus" => RegionSpec::annulus(center, r, big_r),
        "half-plane-annulus" => RegionSpec::HalfPlaneAnnulus { center, r, big_r, orientation },
        "quarter-plane-annulus" => RegionSpec::QuarterPlaneAnnulus { center, r, big_r, orientation },
        "complement-of-quarter-plane-annulus" => {
            RegionSpec::ComplementOfQuarterPlaneAnnulus { center, r, big_r, orientation }
        }
        other => return Err(PyValueError::new_err(format!("unknown annulus kind `{other}`"))),
    })
}

#[pymethods]
impl Event {
    /// Black left-right crossing of `[-lambda1, lambda1] x [-lambda2, lambda2]`.
    #[staticmethod]
    fn cross(lambda1: f64, lambda2: f64) -> PyResult<Self> {
        let spec = EventSpec::cross(RegionSpec::rectangle(Point::default(), lambda1, lambda2));
        spec.validate().map_err(err)?;
        Ok(Self { spec })
    }

    /// `j` alternating arms across an annulus kind centered at the origin.
    #[staticmethod]
    #[pyo3(signature = (r, big_r, j, kind = "annulus", orientation = 0))]
    fn arms(r: f64, big_r: f64, j: u32, kind: &str, orientation: u8) -> PyResult<Self> {
        let spec = EventSpec::arms(annulus_kind(kind, r, big_r, orientation)?, j);
        spec.validate().map_err(err)?;
        Ok(Self { spec })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec: EventSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        spec.validate().map_err(err)?;
        Ok(Self { spec })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("spec serializes")
    }

    fn __repr__(&self) -> String {
        format!("Event({})", self.to_json())
    }
}

/// Evaluate an event on one environment and coloring. The event's region
/// must lie in the environment's safe zone.
#[pyfunction]
fn detect(complex: &Complex, coloring: &Coloring, event: &Event) -> PyResult<bool> {
    events::evaluate(&complex.complex, &complex.points, &coloring.inner, &event.spec).map_err(err)
}

/// Interfaces between the boundaries of the full annulus `r < |x|_inf < R`.
#[pyfunction]
fn count_interfaces(complex: &Complex, coloring: &Coloring, r: f64, big_r: f64) -> PyResult<u32> {
    events::count_interfaces(&complex.complex, &coloring.inner, &RegionSpec::annulus(Point::default(), r, big_r))
        .map_err(err)
}

/// `+1`, `-1` or `0` for a black, white or no circuit around `[-h, h]^2`.
#[pyfunction]
fn detect_circuit(complex: &Complex, coloring: &Coloring, h: f64, delta: f64) -> PyResult<i8> {
    events::detect_circuit(&complex.complex, &coloring.inner, &RegionSpec::square(Point::default(), h), delta)
        .map_err(err)
}

/// Annealed probability of `event`: value, n, std_error and 95% interval.
#[pyfunction]
#[pyo3(signature = (event, replicates, p = 0.5, intensity = 1.0, seed = 0, workers = 1))]
fn annealed(
    py: Python<'_>,
    event: &Event,
    replicates: u64,
    p: f64,
    intensity: f64,
    seed: u64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let params = McParams::new(intensity, p, SeedPath::root(seed)).with_workers(workers);
    let e = py
        .detach(|| estimate_annealed(&event.spec, &params, replicates))
        .map_err(err)?;
    json_of(py, &e)
}

/// Quenched moments of `event` from `k` environments and `m` colorings each.
#[pyfunction]
#[pyo3(signature = (event, k, m, p = 0.5, intensity = 1.0, seed = 0, workers = 1))]
#[allow(clippy::too_many_arguments)]
fn quenched(
    py: Python<'_>,
    event: &Event,
    k: u64,
    m: u64,
    p: f64,
    intensity: f64,
    seed: u64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let params = McParams::new(intensity, p, SeedPath::root(seed)).with_workers(workers);
    let q = py
        .detach(|| estimate_quenched_moments(&event.spec, &params, k, m))
        .map_err(err)?;
    json_of(py, &q)
}

/// Run an experiment config given as JSON text; returns the result record.
#[pyfunction]
#[pyo3(signature = (config, workers = None))]
fn run(py: Python<'_>, config: &str, workers: Option<usize>) -> PyResult<Py<PyAny>> {
    let mut cfg = ExperimentConfig::from_json(config).map_err(|e| run_err(e.into()))?;
    if let Some(w) = workers {
        cfg.workers = w.max(1);
    }
    let record = py.detach(|| experiment::run(&cfg)).map_err(run_err)?;
    let mut v = serde_json::to_value(&record).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    v["csv"] = Value::String(record.to_csv());
    to_py(py, &v)
}

/// Run an acceptance suite (`"fast"` or `"full"`); returns the criteria.
#[pyfunction]
#[pyo3(signature = (suite = "fast", workers = 1))]
fn verify(py: Python<'_>, suite: &str, workers: usize) -> PyResult<Py<PyAny>> {
    let suite: Suite = suite.parse().map_err(PyValueError::new_err)?;
    let report = py.detach(|| experiment::verify(suite, workers, |_| {}));
    json_of(py, &report)
}

#[pymodule]
fn vperc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Complex>()?;
    m.add_class::<Coloring>()?;
    m.add_class::<Event>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(count_interfaces, m)?)?;
    m.add_function(wrap_pyfunction!(detect_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(annealed, m)?)?;
    m.add_function(wrap_pyfunction!(quenched, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("EXPERIMENTS", experiment::REGISTRY.to_vec())?;
    Ok(())
}
