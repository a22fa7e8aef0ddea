//! Python bindings: the evolving autoencoder, probit helpers, environments,
//! the Q-network, metrics and the experiment pipeline.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use saqn::agent::QNetwork as CoreQNetwork;
use saqn::env::{CartPole as CoreCartPole, Environment, GridParams, GridWorld as CoreGrid};
use saqn::evolving_ae::{BatchSampling, EvolvingAutoencoder as CoreAe, PretrainConfig};
use saqn::harness::{compare_agents, run_experiment, ExperimentConfig};
use saqn::metrics::{self, SimulationTrace};
use saqn::numerics::{self, Activation, Matrix, OnlineStats as CoreStats, OptimizerConfig, SeededRng};
use saqn::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::Input(_)
        | Error::Dimension { .. }
        | Error::Domain(_)
        | Error::UnsupportedActivation(_)
        | Error::UndefinedWindow { .. }
        | Error::UndefinedMetric(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn activation(name: &str) -> PyResult<Activation> {
    name.parse().map_err(|_| PyValueError::new_err(format!("unknown activation {name:?}")))
}

fn optimizer(kind: &str, lr: f64) -> PyResult<OptimizerConfig> {
    match kind {
        "sgd" => Ok(OptimizerConfig::sgd(lr)),
        "adam" => Ok(OptimizerConfig::adam(lr)),
        other => Err(PyValueError::new_err(format!("unknown optimizer {other:?}"))),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(to_py)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyfunction]
fn probit_tanh(mu: f64, var: f64) -> PyResult<f64> {
    numerics::probit_expectation_tanh(mu, var).map_err(to_py)
}

#[pyfunction]
fn probit_sigmoid(mu: f64, var: f64) -> PyResult<f64> {
    numerics::probit_expectation_sigmoid(mu, var).map_err(to_py)
}

/// Streaming mean and population variance.
#[pyclass]
struct OnlineStats(CoreStats);

#[pymethods]
impl OnlineStats {
    #[new]
    fn new() -> Self {
        Self(CoreStats::default())
    }

    fn update(&mut self, x: f64) {
        self.0.update(x);
    }

    #[getter]
    fn count(&self) -> u64 {
        self.0.count()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.0.variance()
    }
}

/// Tied-weight autoencoder whose hidden width can grow and shrink.
#[pyclass]
struct EvolvingAutoencoder {
    inner: CoreAe,
    rng: SeededRng,
}

#[pymethods]
impl EvolvingAutoencoder {
    #[new]
    #[pyo3(signature = (input_dim, width, activation="tanh", optimizer="adam", lr=0.01, seed=0))]
    fn new(input_dim: usize, width: usize, activation: &str, optimizer: &str, lr: f64, seed: u64) -> PyResult<Self> {
        let mut rng = SeededRng::new(seed);
        let inner = CoreAe::new(input_dim, width, self::activation(activation)?, self::optimizer(optimizer, lr)?, &mut rng)
            .map_err(to_py)?;
        Ok(Self { inner, rng })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn encode(&self, batch: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.encode(&matrix(batch)?).map_err(to_py)?))
    }

    fn reconstruct(&self, batch: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.forward(&matrix(batch)?).map_err(to_py)?.1))
    }

    fn loss(&self, batch: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.loss(&matrix(batch)?).map_err(to_py)
    }

    /// One gradient step; returns the loss before it.
    fn reconstruction_step(&mut self, batch: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.reconstruction_step(&matrix(batch)?).map_err(to_py)
    }

    /// Pre-trains on `memory` with grow/prune regulation; returns the evolution log as a list of dicts.
    #[pyo3(signature = (memory, max_steps=2000, batch_size=32, evolve=true, sequential=true))]
    fn pretrain<'py>(
        &mut self,
        py: Python<'py>,
        memory: Vec<Vec<f64>>,
        max_steps: usize,
        batch_size: usize,
        evolve: bool,
        sequential: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cfg = PretrainConfig {
            max_steps,
            batch_size,
            evolve,
            sampling: if sequential { BatchSampling::Sequential } else { BatchSampling::Shuffled },
            ..PretrainConfig::default()
        };
        let log = saqn::evolving_ae::pretrain(&mut self.inner, &memory, &cfg, &mut self.rng).map_err(to_py)?;
        let text = serde_json::to_string(&log.events).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        json_to_py(py, &text)
    }
}

/// Cart-pole balancing task.
#[pyclass]
struct CartPole {
    env: CoreCartPole,
    rng: SeededRng,
}

#[pymethods]
impl CartPole {
    #[new]
    #[pyo3(signature = (seed=0))]
    fn new(seed: u64) -> Self {
        Self {
            env: CoreCartPole::new(Default::default()),
            rng: SeededRng::new(seed),
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.env.reset(&mut self.rng)
    }

    /// Returns `(observation, reward, done, truncated)`.
    fn step(&mut self, action: usize) -> PyResult<(Vec<f64>, f64, bool, bool)> {
        let s = self.env.step(action).map_err(to_py)?;
        Ok((s.observation, s.reward, s.done, s.truncated))
    }
}

/// Empty-room navigation task with a 147-value egocentric view.
#[pyclass]
struct GridWorld {
    env: CoreGrid,
    rng: SeededRng,
}

#[pymethods]
impl GridWorld {
    #[new]
    #[pyo3(signature = (seed=0, random_start=false))]
    fn new(seed: u64, random_start: bool) -> Self {
        Self {
            env: CoreGrid::new(GridParams {
                random_start,
                ..GridParams::default()
            }),
            rng: SeededRng::new(seed),
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.env.reset(&mut self.rng)
    }

    fn step(&mut self, action: usize) -> PyResult<(Vec<f64>, f64, bool, bool)> {
        let s = self.env.step(action).map_err(to_py)?;
        Ok((s.observation, s.reward, s.done, s.truncated))
    }
}

/// One-hidden-layer action-value network.
#[pyclass]
struct QNetwork(CoreQNetwork);

#[pymethods]
impl QNetwork {
    #[new]
    #[pyo3(signature = (input_dim, actions, hidden=256, activation="tanh", lr=1e-3, seed=0))]
    fn new(input_dim: usize, actions: usize, hidden: usize, activation: &str, lr: f64, seed: u64) -> PyResult<Self> {
        CoreQNetwork::new(
            input_dim,
            hidden,
            actions,
            self::activation(activation)?,
            OptimizerConfig::adam(lr),
            &mut SeededRng::new(seed),
        )
        .map(Self)
        .map_err(to_py)
    }

    fn q_values(&self, state: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.q_values(&state).map_err(to_py)
    }
}

fn traces(rewards: Vec<Vec<f64>>) -> PyResult<Vec<SimulationTrace>> {
    rewards.into_iter().map(|r| SimulationTrace::from_rewards(r).map_err(to_py)).collect()
}

#[pyfunction]
fn rolling_avg_100(rewards: Vec<f64>, end: usize) -> PyResult<f64> {
    metrics::rolling_avg_100(&rewards, end).map_err(to_py)
}

#[pyfunction]
fn ncs(rewards: Vec<Vec<f64>>, thr: f64) -> PyResult<usize> {
    metrics::ncs(&traces(rewards)?, thr).map_err(to_py)
}

#[pyfunction]
fn aec(rewards: Vec<Vec<f64>>, thr: f64) -> PyResult<f64> {
    metrics::aec(&traces(rewards)?, thr).map_err(to_py)
}

#[pyfunction]
fn ar(rewards: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::ar(&traces(rewards)?).map_err(to_py)
}

#[pyfunction]
fn att(times: Vec<Vec<f64>>) -> PyResult<f64> {
    let t = times
        .into_iter()
        .map(|t| SimulationTrace::new(vec![0.0; t.len()], t).map_err(to_py))
        .collect::<PyResult<Vec<_>>>()?;
    metrics::att(&t).map_err(to_py)
}

/// Parses and validates a TOML config; returns it with defaults filled, as a dict.
#[pyfunction]
fn load_config<'py>(py: Python<'py>, toml_text: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

/// Runs the configured agent over all seeds; returns the manifest as a dict.
#[pyfunction]
fn run(py: Python<'_>, toml_text: &str) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text).map_err(to_py)?;
    let (manifest, _) = py.detach(|| run_experiment(&cfg)).map_err(to_py)?;
    let text = serde_json::to_string(&manifest).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(json_to_py(py, &text)?.unbind())
}

/// Runs QN, AQN and SAQN on shared seeds; returns the comparison report as a dict.
#[pyfunction]
fn compare(py: Python<'_>, toml_text: &str) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text).map_err(to_py)?;
    let (report, _) = py.detach(|| compare_agents(&cfg)).map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(json_to_py(py, &text)?.unbind())
}

#[pymodule]
fn saqn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(probit_tanh, m)?)?;
    m.add_function(wrap_pyfunction!(probit_sigmoid, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_avg_100, m)?)?;
    m.add_function(wrap_pyfunction!(ncs, m)?)?;
    m.add_function(wrap_pyfunction!(aec, m)?)?;
    m.add_function(wrap_pyfunction!(ar, m)?)?;
    m.add_function(wrap_pyfunction!(att, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_class::<OnlineStats>()?;
    m.add_class::<EvolvingAutoencoder>()?;
    m.add_class::<CartPole>()?;
    m.add_class::<GridWorld>()?;
    m.add_class::<QNetwork>()?;
    Ok(())
}
