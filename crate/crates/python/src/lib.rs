//! Python module `hellinger`.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hellinger_discord::app::{self, DiscordRequest, Method, Model, ScanSpec, Settings, Suite};
use hellinger_discord::closed_forms;
use hellinger_discord::engine::{self, OptimizerConfig};
use hellinger_discord::io;
use hellinger_discord::linalg::{CMatrix, CVector};
use hellinger_discord::states::{DensityMatrix, PureState};
use hellinger_discord::symmetric::{self, SymmetricScan};
use hellinger_discord::DiscordError;

fn to_py(e: DiscordError) -> PyErr {
    match e {
        DiscordError::Io(e) => PyOSError::new_err(e.to_string()),
        DiscordError::Convergence { .. } | DiscordError::Resource(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A pure or mixed state of several parties.
#[pyclass(name = "State", module = "hellinger", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    inner: hellinger_discord::states::State,
}

#[pymethods]
impl PyState {
    /// Pure state from amplitudes; party 1 is the slowest index.
    #[staticmethod]
    fn pure(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> PyResult<Self> {
        let v = CVector::from_vec(amplitudes);
        let p = PureState::new(v, dims).map_err(to_py)?;
        Ok(Self { inner: p.into() })
    }

    /// Density matrix from a list of rows.
    #[staticmethod]
    fn mixed(rows: Vec<Vec<Complex64>>, dims: Vec<usize>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let m = CMatrix::from_row_iterator(d, d, rows.into_iter().flatten());
        let rho = DensityMatrix::new(m, dims).map_err(to_py)?;
        Ok(Self { inner: rho.into() })
    }

    /// Parses the JSON state-file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::parse_state(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        io::state_to_json(&self.inner)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn is_pure(&self) -> bool {
        matches!(self.inner, hellinger_discord::states::State::Pure(_))
    }

    /// Density matrix as a list of rows.
    fn density(&self) -> Vec<Vec<Complex64>> {
        let rho = self.inner.density();
        let m = rho.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "State(dims={:?}, kind={})",
            self.inner.dims(),
            if self.is_pure() { "pure" } else { "mixed" }
        )
    }
}

/// Result of a D^H evaluation.
#[pyclass(name = "DiscordReport", module = "hellinger", frozen)]
pub struct PyDiscordReport {
    inner: app::DiscordReport,
}

#[pymethods]
impl PyDiscordReport {
    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities.clone()
    }

    /// `(theta, phi)` per party when every party is a qubit.
    #[getter]
    fn angles(&self) -> Option<Vec<(f64, f64)>> {
        self.inner
            .basis
            .iter()
            .map(|b| match b {
                app::BasisEntry::Qubit { theta, phi } => Some((*theta, *phi)),
                app::BasisEntry::Unitary { .. } => None,
            })
            .collect()
    }

    #[getter]
    fn warning(&self) -> Option<String> {
        self.inner.warning.clone()
    }

    /// The JSON document printed by the command-line tool.
    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("DiscordReport(value={}, method={:?})", self.inner.value, self.inner.method)
    }
}

fn settings(workers: Option<usize>, grid_points: Option<usize>, restarts: Option<usize>) -> Settings {
    let mut s = Settings::default();
    s.optimizer.workers = workers;
    if let Some(g) = grid_points {
        s.optimizer.grid_points = g;
    }
    if let Some(r) = restarts {
        s.optimizer.restarts = r;
    }
    s
}

/// Evaluates D^H with the named method (`auto`, `optimize`, `bruteforce`,
/// `pure-bipartite`, `werner`, `bell-diagonal`, `xstate`, `symmetric`,
/// `werner-mlevel`, `isotropic`).
#[pyfunction]
#[pyo3(signature = (state=None, method="auto", *, r=None, lambdas=None, levels=None, x=None, workers=None, grid_points=None, restarts=None))]
#[allow(clippy::too_many_arguments)]
fn discord(
    py: Python<'_>,
    state: Option<&PyState>,
    method: &str,
    r: Option<f64>,
    lambdas: Option<[f64; 4]>,
    levels: Option<usize>,
    x: Option<f64>,
    workers: Option<usize>,
    grid_points: Option<usize>,
    restarts: Option<usize>,
) -> PyResult<PyDiscordReport> {
    let method: Method = method.parse().map_err(to_py)?;
    let req = DiscordRequest {
        state: state.map(|s| s.inner.clone()),
        r,
        lambdas,
        levels,
        x,
    };
    let s = settings(workers, grid_points, restarts);
    let inner = py.detach(|| app::run_discord(&req, method, &s)).map_err(to_py)?;
    Ok(PyDiscordReport { inner })
}

/// Variational D^H over qubit product bases.
#[pyfunction]
#[pyo3(signature = (state, *, grid_points=9, restarts=8, workers=None))]
fn dh_optimize(
    py: Python<'_>,
    state: &PyState,
    grid_points: usize,
    restarts: usize,
    workers: Option<usize>,
) -> PyResult<f64> {
    let cfg = OptimizerConfig {
        grid_points,
        restarts,
        workers,
        ..OptimizerConfig::default()
    };
    py.detach(|| engine::dh_optimize(&state.inner, &cfg))
        .map(|r| r.value)
        .map_err(to_py)
}

/// Minimum of D^H over a Cartesian grid of qubit bases.
#[pyfunction]
#[pyo3(signature = (state, grid_n=13))]
fn dh_bruteforce(py: Python<'_>, state: &PyState, grid_n: usize) -> PyResult<f64> {
    py.detach(|| engine::dh_bruteforce(&state.inner, grid_n)).map_err(to_py)
}

/// D^H on a fixed qubit product basis given as `(theta, phi)` per party.
#[pyfunction]
fn dh_fixed_basis(state: &PyState, angles: Vec<(f64, f64)>) -> PyResult<f64> {
    let flat: Vec<f64> = angles.iter().flat_map(|&(t, p)| [t, p]).collect();
    let basis = hellinger_discord::states::ProductBasis::from_flat_angles(&flat);
    engine::dh_fixed_basis(&state.inner, &basis).map_err(to_py)
}

#[pyfunction]
fn dh_pure_bipartite(state: &PyState) -> PyResult<f64> {
    match &state.inner {
        hellinger_discord::states::State::Pure(p) => {
            closed_forms::dh_pure_bipartite(p).map(|r| r.0).map_err(to_py)
        }
        _ => Err(PyValueError::new_err("expected a pure state")),
    }
}

#[pyfunction]
fn dh_werner_2qubit(r: f64) -> PyResult<f64> {
    closed_forms::dh_werner_2qubit(r).map_err(to_py)
}

#[pyfunction]
fn dh_bell_diagonal(lambdas: [f64; 4]) -> PyResult<f64> {
    let spec = closed_forms::BellDiagonalSpec::new(lambdas).map_err(to_py)?;
    Ok(closed_forms::dh_bell_diagonal(&spec).value)
}

#[pyfunction]
fn dh_werner_mlevel(m: usize, x: f64) -> PyResult<f64> {
    closed_forms::dh_werner_mlevel(m, x).map_err(to_py)
}

#[pyfunction]
fn dh_isotropic_mlevel(m: usize, x: f64) -> PyResult<f64> {
    closed_forms::dh_isotropic_mlevel(m, x).map_err(to_py)
}

/// D^H for qubit states supported on the symmetric subspace.
#[pyfunction]
fn dh_symmetric(py: Python<'_>, state: &PyState) -> PyResult<f64> {
    py.detach(|| {
        let s = symmetric::SymmetricState::from_state(&state.inner, 1e-8)?;
        symmetric::dh_symmetric(&s, &SymmetricScan::default()).map(|r| r.value)
    })
    .map_err(to_py)
}

/// Sweeps a model parameter. Rows are `(param, dh, theta, phi, error)`.
#[pyfunction]
#[pyo3(signature = (model, *, param=None, start=None, stop=None, points=None, n=None, lambda_=None, gamma=None, h_z=None, h_x=None, omega=None, omega0=None, workers=None))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn scan(
    py: Python<'_>,
    model: &str,
    param: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    n: Option<usize>,
    lambda_: Option<f64>,
    gamma: Option<f64>,
    h_z: Option<f64>,
    h_x: Option<f64>,
    omega: Option<f64>,
    omega0: Option<f64>,
    workers: Option<usize>,
) -> PyResult<Vec<(f64, Option<f64>, Option<f64>, Option<f64>, Option<String>)>> {
    let model: Model = model.parse().map_err(to_py)?;
    let mut spec = ScanSpec::for_model(model);
    let f = &mut spec.fixed;
    f.n = n.unwrap_or(f.n);
    f.lambda = lambda_.unwrap_or(f.lambda);
    f.gamma = gamma.unwrap_or(f.gamma);
    f.h_z = h_z.unwrap_or(f.h_z);
    f.h_x = h_x.unwrap_or(f.h_x);
    f.omega = omega.unwrap_or(f.omega);
    f.omega0 = omega0.unwrap_or(f.omega0);
    spec.param = param.unwrap_or(spec.param);
    spec.start = start.unwrap_or(spec.start);
    spec.stop = stop.unwrap_or(spec.stop);
    spec.points = points.unwrap_or(spec.points);
    let s = settings(workers, None, None);
    let rows = py.detach(|| app::run_scan(&spec, &s)).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.param, r.dh, r.theta, r.phi, r.error))
        .collect())
}

/// Runs one verification suite; returns `(passed, max_deviation, summary)`.
#[pyfunction]
#[pyo3(signature = (suite, seed=0, trials=50, workers=None))]
fn verify(
    py: Python<'_>,
    suite: &str,
    seed: u64,
    trials: usize,
    workers: Option<usize>,
) -> PyResult<(bool, f64, String)> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let s = settings(workers, None, None);
    let rep = py
        .detach(|| app::run_verify(suite, seed, trials, &s))
        .map_err(to_py)?;
    Ok((rep.passed, rep.max_deviation, rep.to_string()))
}

#[pymodule]
pub fn hellinger(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyDiscordReport>()?;
    m.add_function(wrap_pyfunction!(discord, m)?)?;
    m.add_function(wrap_pyfunction!(dh_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(dh_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(dh_fixed_basis, m)?)?;
    m.add_function(wrap_pyfunction!(dh_pure_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(dh_werner_2qubit, m)?)?;
    m.add_function(wrap_pyfunction!(dh_bell_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(dh_werner_mlevel, m)?)?;
    m.add_function(wrap_pyfunction!(dh_isotropic_mlevel, m)?)?;
    m.add_function(wrap_pyfunction!(dh_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
