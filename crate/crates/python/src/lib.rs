//! Python module `wpcn`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wpcn::oracle::GridSpec;
use wpcn::protocol::{default_gamma0, Simulation};
use wpcn::{channel, Error, Mode, StepRule};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig { .. } | Error::Parse { .. } | Error::LambertDomain(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// Network parameters. Defaults are the five-user reference deployment.
#[pyclass(name = "NetworkConfig", from_py_object)]
#[derive(Clone)]
struct PyNetworkConfig {
    inner: wpcn::NetworkConfig,
}

#[pymethods]
impl PyNetworkConfig {
    #[new]
    #[pyo3(signature = (distances=None, p_c=None, p_avg=None, p_max=None, eta=None))]
    fn new(
        distances: Option<Vec<f64>>,
        p_c: Option<f64>,
        p_avg: Option<f64>,
        p_max: Option<f64>,
        eta: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let mut c = match distances {
            Some(d) => wpcn::NetworkConfig::with_distances(d),
            None => wpcn::NetworkConfig::reference(5).map_err(py_err)?,
        };
        if let Some(v) = p_c {
            c.p_c = v;
        }
        if let Some(v) = p_avg {
            c.p_avg = v;
            c.p_max = 5.0 * v;
        }
        if let Some(v) = p_max {
            c.p_max = v;
        }
        if let Some(v) = eta {
            c.eta = v;
        }
        c.validate().map_err(py_err)?;
        Ok(PyNetworkConfig { inner: c })
    }

    /// First `k` users of the reference deployment.
    #[staticmethod]
    fn reference(k: usize) -> PyResult<Self> {
        Ok(PyNetworkConfig {
            inner: wpcn::NetworkConfig::reference(k).map_err(py_err)?,
        })
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.inner.num_users()
    }
    #[getter]
    fn distances(&self) -> Vec<f64> {
        self.inner.distances.clone()
    }
    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.inner.eta.clone()
    }
    #[getter]
    fn p_c(&self) -> f64 {
        self.inner.p_c
    }
    #[setter]
    fn set_p_c(&mut self, v: f64) {
        self.inner.p_c = v;
    }
    #[getter]
    fn p_avg(&self) -> f64 {
        self.inner.p_avg
    }
    #[setter]
    fn set_p_avg(&mut self, v: f64) {
        self.inner.p_avg = v;
    }
    #[getter]
    fn p_max(&self) -> f64 {
        self.inner.p_max
    }
    #[setter]
    fn set_p_max(&mut self, v: f64) {
        self.inner.p_max = v;
    }
    #[getter]
    fn n0(&self) -> f64 {
        self.inner.n0
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkConfig(K={}, p_c={:e}, P_avg={}, P_max={})",
            self.inner.num_users(),
            self.inner.p_c,
            self.inner.p_avg,
            self.inner.p_max
        )
    }
}

/// Power gains of one fading epoch.
#[pyclass(name = "ChannelState", from_py_object)]
#[derive(Clone)]
struct PyChannelState {
    inner: wpcn::ChannelState,
}

#[pymethods]
impl PyChannelState {
    #[new]
    fn new(epoch: u64, gains: Vec<f64>, config: &PyNetworkConfig) -> PyResult<Self> {
        Ok(PyChannelState {
            inner: wpcn::ChannelState::new(epoch, gains, &config.inner).map_err(py_err)?,
        })
    }

    #[getter]
    fn epoch(&self) -> u64 {
        self.inner.epoch
    }
    #[getter]
    fn gains(&self) -> Vec<f64> {
        self.inner.gains.clone()
    }
    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.a.clone()
    }
}

#[pyclass(name = "EpochAllocation", skip_from_py_object)]
struct PyEpochAllocation {
    inner: wpcn::EpochAllocation,
    threshold: f64,
}

#[pymethods]
impl PyEpochAllocation {
    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }
    #[getter]
    fn tau0(&self) -> f64 {
        self.inner.tau0
    }
    #[getter]
    fn tau(&self) -> Vec<f64> {
        self.inner.tau.clone()
    }
    #[getter]
    fn e(&self) -> f64 {
        self.inner.e
    }
    #[getter]
    fn tx_power(&self) -> Vec<f64> {
        self.inner.tx_power.clone()
    }
    #[getter]
    fn rate(&self) -> Vec<f64> {
        self.inner.rate.clone()
    }
    /// Price above which the BS stays silent this epoch.
    #[getter]
    fn threshold(&self) -> f64 {
        self.threshold
    }
    fn transmits(&self) -> bool {
        self.inner.transmits()
    }
    fn sum_rate(&self) -> f64 {
        self.inner.sum_rate()
    }
    fn lagrangian(&self, rbar: Vec<f64>, lam: f64) -> f64 {
        self.inner.lagrangian(&rbar, lam)
    }
}

#[pyclass(name = "SimulationResult", skip_from_py_object, get_all)]
struct PySimulationResult {
    mode: String,
    epochs: u64,
    avg_rates: Vec<f64>,
    sum_rate: f64,
    jain: f64,
    avg_bs_power: f64,
    final_lambda: f64,
    /// Per-epoch `lambda_hat` the allocation was decided at.
    lambda_trace: Vec<f64>,
    p0_trace: Vec<f64>,
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    wpcn::lambert_w0(x).map_err(py_err)
}

/// Root of `ln(1 - c + z) - z / (1 - c + z) = b` on the principal branch.
#[pyfunction]
fn solve_z(c: f64, b: f64) -> PyResult<f64> {
    wpcn::solve_z(c, b).map_err(py_err)
}

#[pyfunction]
fn jain_index(rates: Vec<f64>) -> Option<f64> {
    wpcn::jain_index(&rates)
}

#[pyfunction]
fn sample_epoch(seed: u64, config: &PyNetworkConfig, epoch: u64) -> PyChannelState {
    PyChannelState {
        inner: channel::sample_epoch(seed, &config.inner, epoch),
    }
}

#[pyfunction]
fn allocate_epoch(
    channel: &PyChannelState,
    config: &PyNetworkConfig,
    lam: f64,
    rbar: Vec<f64>,
) -> PyResult<PyEpochAllocation> {
    let (inner, ws) =
        wpcn::allocate_epoch(&channel.inner, &config.inner, lam, &rbar).map_err(py_err)?;
    Ok(PyEpochAllocation {
        inner,
        threshold: ws.condition_value,
    })
}

/// Largest KKT residual of the closed-form allocation, or `None` when the
/// BS is silent.
#[pyfunction]
fn kkt_residual(
    channel: &PyChannelState,
    config: &PyNetworkConfig,
    lam: f64,
    rbar: Vec<f64>,
) -> PyResult<Option<f64>> {
    let (alloc, ws) =
        wpcn::allocate_epoch(&channel.inner, &config.inner, lam, &rbar).map_err(py_err)?;
    Ok(wpcn::verify_kkt(&alloc, &ws, &channel.inner, &config.inner, lam, &rbar).map(|r| r.max_abs()))
}

/// Brute-force maximum of the per-epoch Lagrangian (K <= 3).
#[pyfunction]
#[pyo3(signature = (channel, config, lam, rbar, points=50))]
fn grid_search_epoch<'py>(
    py: Python<'py>,
    channel: &PyChannelState,
    config: &PyNetworkConfig,
    lam: f64,
    rbar: Vec<f64>,
    points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = GridSpec::new(points, points, points).map_err(py_err)?;
    let r = py
        .detach(|| {
            wpcn::oracle::grid_search_epoch(&channel.inner, &config.inner, lam, &rbar, &grid)
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("objective", r.best_objective)?;
    d.set_item("tau0", r.best_point.tau0)?;
    d.set_item("tau", r.best_point.tau)?;
    d.set_item("e", r.best_point.e)?;
    d.set_item("e_on_boundary", r.e_boundary_cells <= 1.0)?;
    Ok(d)
}

/// Runs the online protocol for `epochs` fading epochs.
#[pyfunction]
#[pyo3(signature = (config, epochs, seed, mode="pf", gamma0=None, step_rule="scaled"))]
fn run(
    py: Python<'_>,
    config: &PyNetworkConfig,
    epochs: u64,
    seed: u64,
    mode: &str,
    gamma0: Option<f64>,
    step_rule: &str,
) -> PyResult<PySimulationResult> {
    let mode: Mode = parse(mode)?;
    let rule: StepRule = parse(step_rule)?;
    let cfg = &config.inner;
    let gamma0 = gamma0.unwrap_or_else(|| default_gamma0(cfg));
    let result = py
        .detach(|| -> wpcn::Result<_> {
            let model = wpcn::ChannelModel::new(seed);
            let mut sim = Simulation::new(cfg, mode, gamma0, true)?.with_step_rule(rule);
            for i in 1..=epochs {
                sim.advance(&model.sample_epoch(cfg, i))?;
            }
            Ok(sim.finish())
        })
        .map_err(py_err)?;
    Ok(PySimulationResult {
        mode: result.mode.to_string(),
        epochs: result.epochs,
        sum_rate: result.sum_rate,
        jain: result.jain,
        avg_bs_power: result.avg_bs_power,
        final_lambda: result.final_state.lambda_hat,
        lambda_trace: result.records.iter().map(|r| r.lambda_hat).collect(),
        p0_trace: result.records.iter().map(|r| r.p0).collect(),
        avg_rates: result.avg_rates,
    })
}

/// Price that meets `P_avg` exactly on the seeded trace with fixed weights.
#[pyfunction]
#[pyo3(signature = (config, epochs, seed, mode="maxsum", rbar=None))]
fn calibrate_lambda_offline(
    py: Python<'_>,
    config: &PyNetworkConfig,
    epochs: u64,
    seed: u64,
    mode: &str,
    rbar: Option<Vec<f64>>,
) -> PyResult<f64> {
    let mode: Mode = parse(mode)?;
    let cfg = &config.inner;
    let rbar = rbar.unwrap_or_else(|| vec![1.0; cfg.num_users()]);
    py.detach(|| {
        let trace = wpcn::ChannelModel::new(seed).trace(cfg, epochs);
        wpcn::calibrate_lambda_offline(cfg, &trace, mode, &rbar)
    })
    .map_err(py_err)
}

#[pymodule(name = "wpcn")]
fn wpcn_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkConfig>()?;
    m.add_class::<PyChannelState>()?;
    m.add_class::<PyEpochAllocation>()?;
    m.add_class::<PySimulationResult>()?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(solve_z, m)?)?;
    m.add_function(wrap_pyfunction!(jain_index, m)?)?;
    m.add_function(wrap_pyfunction!(sample_epoch, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_epoch, m)?)?;
    m.add_function(wrap_pyfunction!(kkt_residual, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search_epoch, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_lambda_offline, m)?)?;
    Ok(())
}
