//! Python bindings, importable as `entcert`.

use entcert::{ConditionalMoments, Error, ExactSubspace, HermitianMatrix, Mode, ProbeRecord};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(entcert, ParseError, PyValueError);
create_exception!(entcert, DomainError, PyValueError);
create_exception!(entcert, InfeasibleError, PyValueError);
create_exception!(entcert, SolverError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::DefectDomain { .. } => DomainError::new_err(msg),
        Error::InconsistentData => InfeasibleError::new_err(msg),
        Error::SolverFailure(_) | Error::NoConvergence { .. } => SolverError::new_err(msg),
        Error::Parse(_) => ParseError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

type Moments = (f64, f64, f64, f64);

fn moments(m: Moments) -> ConditionalMoments {
    ConditionalMoments { mean_x: m.0, mean_p: m.1, var_x: m.2, var_p: m.3 }
}

fn tuple(m: &ConditionalMoments) -> Moments {
    (m.mean_x, m.mean_p, m.var_x, m.var_p)
}

/// Probe record: conditional moments `(mean_x, mean_p, var_x, var_p)` of both
/// outputs, the input overlap `c`, and optional exact `(lambda0, lambda1, overlap_s)`.
#[pyclass(name = "ProbeRecord", module = "entcert", skip_from_py_object)]
#[derive(Clone)]
struct PyProbe {
    inner: ProbeRecord,
}

#[pymethods]
impl PyProbe {
    #[new]
    #[pyo3(signature = (state0, state1, input_overlap_c, exact=None))]
    fn new(state0: Moments, state1: Moments, input_overlap_c: f64, exact: Option<(f64, f64, f64)>) -> PyResult<Self> {
        let inner = ProbeRecord {
            state0: moments(state0),
            state1: moments(state1),
            input_overlap_c,
            exact: exact.map(|(lambda0, lambda1, overlap_s)| ExactSubspace { lambda0, lambda1, overlap_s }),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        entcert::probe_file::parse_probe(text).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_toml(&self) -> String {
        entcert::probe_file::write_probe(&self.inner)
    }

    #[getter]
    fn state0(&self) -> Moments {
        tuple(&self.inner.state0)
    }

    #[getter]
    fn state1(&self) -> Moments {
        tuple(&self.inner.state1)
    }

    #[getter]
    fn input_overlap_c(&self) -> f64 {
        self.inner.input_overlap_c
    }

    #[getter]
    fn exact(&self) -> Option<(f64, f64, f64)> {
        self.inner.exact.map(|e| (e.lambda0, e.lambda1, e.overlap_s))
    }

    fn __repr__(&self) -> String {
        format!(
            "ProbeRecord(state0={:?}, state1={:?}, input_overlap_c={}, exact={:?})",
            self.state0(),
            self.state1(),
            self.inner.input_overlap_c,
            self.exact()
        )
    }
}

fn hermitian(rows: Vec<Vec<Complex64>>) -> PyResult<HermitianMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let m = entcert::ComplexMatrix::from_row_major(n, rows.into_iter().flatten().collect()).map_err(to_py)?;
    HermitianMatrix::new(m).map_err(to_py)
}

fn nested(h: &HermitianMatrix) -> Vec<Vec<Complex64>> {
    (0..h.dim()).map(|i| (0..h.dim()).map(|j| h[(i, j)]).collect()).collect()
}

/// Negativity of a 4x4 two-qubit density matrix given as nested lists.
#[pyfunction]
fn negativity(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    entcert::negativity(&hermitian(rho)?).map_err(to_py)
}

#[pyfunction]
fn partial_transpose(rho: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    entcert::partial_transpose_a(&hermitian(rho)?).map(|m| nested(&m)).map_err(to_py)
}

#[pyfunction]
fn trace_norm(m: Vec<Vec<Complex64>>) -> PyResult<f64> {
    entcert::trace_norm(&hermitian(m)?).map_err(to_py)
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
#[pyfunction]
fn eigh(m: Vec<Vec<Complex64>>) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let spec = entcert::eig_hermitian(&hermitian(m)?).map_err(to_py)?;
    Ok((spec.eigenvalues, spec.eigenvectors))
}

#[pyfunction]
fn input_overlap(alpha: f64) -> f64 {
    entcert::input_overlap(alpha)
}

#[pyfunction]
fn initial_negativity(c: f64, transmittivity: f64) -> f64 {
    entcert::initial_negativity(c, transmittivity)
}

/// Probe record of the loss-and-noise channel for input overlap `c`. With
/// `exact=True` the closed-form subspace data are attached.
#[pyfunction]
#[pyo3(signature = (c, transmittivity, excess_noise, exact=false))]
fn simulate_loss_noise(c: f64, transmittivity: f64, excess_noise: f64, exact: bool) -> PyResult<PyProbe> {
    let input = entcert::InputSpec::from_overlap(c).map_err(to_py)?;
    let ch = entcert::LossNoiseChannel::new(transmittivity, excess_noise).map_err(to_py)?;
    let mut inner = entcert::simulate_loss_noise(input, ch);
    if exact {
        inner = inner.with_exact(entcert::loss_noise_exact_subspace(input, ch));
    }
    Ok(PyProbe { inner })
}

/// Probe record, with exact subspace data, of the thermal beam-splitter channel.
#[pyfunction]
fn simulate_thermal_splitter(alpha: f64, n_bar: f64) -> PyResult<PyProbe> {
    let input = entcert::InputSpec::new(alpha).map_err(to_py)?;
    let ch = entcert::ThermalSplitterChannel::new(n_bar).map_err(to_py)?;
    Ok(PyProbe { inner: entcert::simulate_thermal_splitter(input, ch).0 })
}

#[pyfunction]
fn thermal_projected_state(alpha: f64, n_bar: f64) -> PyResult<Vec<Vec<Complex64>>> {
    let input = entcert::InputSpec::new(alpha).map_err(to_py)?;
    let ch = entcert::ThermalSplitterChannel::new(n_bar).map_err(to_py)?;
    entcert::thermal_projected_state(input, ch).map(|m| nested(&m)).map_err(to_py)
}

/// Subspace estimate as a dict with `U0`, `U1`, `kappa`, `b_lower`, `b_upper`.
#[pyfunction]
#[pyo3(signature = (probe, exact=false))]
fn estimate<'py>(py: Python<'py>, probe: PyRef<'py, PyProbe>, exact: bool) -> PyResult<Bound<'py, PyDict>> {
    let est = if exact { entcert::estimate_exact(&probe.inner) } else { entcert::estimate(&probe.inner) }.map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("U0", est.defects.u0)?;
    d.set_item("U1", est.defects.u1)?;
    d.set_item("kappa", est.kappa)?;
    d.set_item("b_lower", est.b_lower)?;
    d.set_item("b_upper", est.b_upper)?;
    d.set_item("exact_overlap", est.exact_overlap)?;
    Ok(d)
}

/// Negativity lower bound. Returns a dict with `bound`, `mode`, `sides`,
/// `shortcut` and `regions` (a list of `(objective, status)`).
#[pyfunction]
#[pyo3(signature = (probe, sides=4, mode="estimated"))]
fn bound<'py>(py: Python<'py>, probe: PyRef<'py, PyProbe>, sides: usize, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let mode: Mode = mode.parse().map_err(to_py)?;
    let opts = entcert::BoundOptions { sides, mode, overlap_override: None };
    let r = entcert::min_negativity(&probe.inner, &opts).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("bound", r.bound)?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("sides", r.polygon_sides)?;
    let shortcut = r.shortcut.map(|s| match s {
        entcert::Shortcut::DegenerateSubspace => "degenerate_subspace",
        entcert::Shortcut::SeparableWitness => "separable_witness",
    });
    d.set_item("shortcut", shortcut)?;
    let regions: Vec<(f64, String)> = r.region_minima.iter().map(|m| (m.objective, m.status.to_string())).collect();
    d.set_item("regions", regions)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "entcert")]
fn entcert_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyProbe>()?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("DomainError", py.get_type::<DomainError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add("SolverError", py.get_type::<SolverError>())?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(partial_transpose, m)?)?;
    m.add_function(wrap_pyfunction!(trace_norm, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(input_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(initial_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_loss_noise, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_thermal_splitter, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_projected_state, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    Ok(())
}
