use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use wcounts_core::config::ExperimentConfig;
use wcounts_core::diagram_action::DiagramAction;
use wcounts_core::enumerate::{enumerate_auto, CountQuery, CountSeries, EnumOptions};
use wcounts_core::exponents::exponent_report;
use wcounts_core::fit::{fit_asymptotic, verdict, Tolerances};
use wcounts_core::heights::{global_height, PointRep};
use wcounts_core::picard::{BoundarySelection, DivisorVector};
use wcounts_core::place::Place;
use wcounts_core::root_system::{self, TypeLetter};
use wcounts_core::zeta::{self, EulerFactorSpec, VolumeModel, ZetaTemplate};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Round-trips through `json.loads` so callers get plain dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

fn letter(t: &str) -> PyResult<TypeLetter> {
    let c = t.chars().next().ok_or_else(|| err("empty type letter"))?;
    serde_json::from_value(serde_json::Value::String(c.to_ascii_uppercase().to_string())).map_err(err)
}

fn places(v: &[String]) -> PyResult<Vec<Place>> {
    v.iter().map(|s| s.parse::<Place>().map_err(err)).collect()
}

fn selection(rank: usize, boundary: &[usize]) -> PyResult<BoundarySelection> {
    let zero: Vec<usize> = boundary
        .iter()
        .map(|&i| i.checked_sub(1).ok_or_else(|| err("boundary indices are 1-based")))
        .collect::<PyResult<_>>()?;
    BoundarySelection::new(rank, zero).map_err(err)
}

#[pyclass(frozen, name = "RootSystem")]
struct PyRootSystem {
    inner: root_system::RootSystem,
}

#[pymethods]
impl PyRootSystem {
    #[new]
    fn new(type_letter: &str, rank: usize) -> PyResult<Self> {
        Ok(Self {
            inner: root_system::build_root_system(letter(type_letter)?, rank).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn kappa(&self) -> Vec<i64> {
        self.inner.kappa().to_vec()
    }

    #[getter]
    fn cartan(&self) -> Vec<Vec<i64>> {
        self.inner.cartan_matrix().to_vec()
    }

    #[getter]
    fn positive_roots(&self) -> Vec<Vec<i64>> {
        self.inner.positive_roots().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("RootSystem('{}')", self.inner.name())
    }
}

/// Exponent report for a configuration given as a JSON string.
#[pyfunction]
fn predict(py: Python<'_>, config: &str) -> PyResult<Py<PyAny>> {
    let exp = ExperimentConfig::from_json(config).and_then(|c| c.validate()).map_err(err)?;
    let r = exponent_report(&exp.da, &exp.sel, &exp.lam, &exp.places).map_err(err)?;
    to_py(py, &r)
}

/// Height of the class of an `n x n` integer matrix (row-major).
#[pyfunction]
fn height(n: usize, entries: Vec<i64>, lam: Vec<i64>) -> PyResult<f64> {
    let p = PointRep::new(n, entries).map_err(err)?;
    Ok(global_height(&p, &DivisorVector::from_ints(&lam)).map_err(err)?.total())
}

#[pyfunction]
#[pyo3(signature = (n, lam, boundary, thresholds, places = vec!["inf".to_string()], budget = None))]
fn count(
    py: Python<'_>,
    n: usize,
    lam: Vec<i64>,
    boundary: Vec<usize>,
    thresholds: Vec<f64>,
    places: Vec<String>,
    budget: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let places = self::places(&places)?;
    let sel = selection(n.saturating_sub(1), &boundary)?;
    let q = CountQuery::new(n, DivisorVector::from_ints(&lam), sel, &places, thresholds).map_err(err)?;
    let mut opts = EnumOptions::default();
    if let Some(b) = budget {
        opts.budget = b;
    }
    let s = py.detach(|| enumerate_auto(&q, &opts)).map_err(err)?;
    to_py(
        py,
        &serde_json::json!({"thresholds": s.thresholds, "counts": s.counts, "flagged": s.flagged, "seconds": s.seconds}),
    )
}

#[pyfunction]
#[pyo3(signature = (thresholds, counts, a, b))]
fn fit(py: Python<'_>, thresholds: Vec<f64>, counts: Vec<u64>, a: f64, b: i64) -> PyResult<Py<PyAny>> {
    let k = thresholds.len();
    let series = CountSeries {
        thresholds,
        counts,
        flagged: vec![0; k],
        seconds: 0.0,
        points: None,
    };
    let f = fit_asymptotic(&series, Some(b)).map_err(err)?;
    let v = verdict(a, b, &f, &Tolerances::default());
    to_py(py, &serde_json::json!({"fit": f, "verdict": v}))
}

/// `PGL_2` local factor at `q`: the geometric series, or the cell sum with
/// exact lattice-count volumes.
#[pyfunction]
#[pyo3(signature = (q, s, lam = 1.0, exact = false))]
fn local_factor(q: u64, s: f64, lam: f64, exact: bool) -> PyResult<f64> {
    let spec = EulerFactorSpec::pgl2(q, lam, zeta::DEFAULT_DEPTH).map_err(err)?;
    if exact {
        Ok(zeta::cell_sum_local_integral(&spec, s, VolumeModel::ExactPgl2).map_err(err)?.value)
    } else {
        Ok(zeta::geometric_local_factor(&spec, s).map_err(err)?.value)
    }
}

fn template(type_letter: &str, rank: usize, lam: &[i64], boundary: &[usize]) -> PyResult<ZetaTemplate> {
    let rs = root_system::build_root_system(letter(type_letter)?, rank).map_err(err)?;
    let sel = selection(rank, boundary)?;
    ZetaTemplate::new(&DiagramAction::trivial(&rs), &DivisorVector::from_ints(lam), &sel).map_err(err)
}

/// `(s - a)` times the truncated Euler product, per `s`.
#[pyfunction]
#[pyo3(signature = (type_letter, rank, lam, boundary, s, cutoff = 10_000, delta = true))]
#[allow(clippy::too_many_arguments)]
fn pole_probe(
    py: Python<'_>,
    type_letter: &str,
    rank: usize,
    lam: Vec<i64>,
    boundary: Vec<usize>,
    s: Vec<f64>,
    cutoff: u64,
    delta: bool,
) -> PyResult<Py<PyAny>> {
    let t = template(type_letter, rank, &lam, &boundary)?;
    let rows = zeta::pole_probe(&t, cutoff, &s, delta).map_err(err)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (type_letter, rank, lam, boundary, s, cutoff = 10_000, delta = true))]
fn global_product(
    type_letter: &str,
    rank: usize,
    lam: Vec<i64>,
    boundary: Vec<usize>,
    s: f64,
    cutoff: u64,
    delta: bool,
) -> PyResult<f64> {
    let t = template(type_letter, rank, &lam, &boundary)?;
    Ok(zeta::truncated_global_product(&t, cutoff, s, delta).map_err(err)?.value)
}

#[pymodule]
fn wcounts(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRootSystem>()?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(height, m)?)?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(local_factor, m)?)?;
    m.add_function(wrap_pyfunction!(pole_probe, m)?)?;
    m.add_function(wrap_pyfunction!(global_product, m)?)?;
    Ok(())
}
