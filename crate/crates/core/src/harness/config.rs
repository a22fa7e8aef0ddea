use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{AgentKind, InputMode, Normalizer, QnConfig, TrainConfig};
use crate::env::{EnvKind, GridParams, CARTPOLE_OBS_BOUNDS, GRID_OBS_DIM};
use crate::error::{Error, Result};
use crate::evolving_ae::{BatchSampling, PretrainConfig, RegulatoryConstants};
use crate::numerics::{Activation, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

/// Autoencoder section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeSection {
    /// `None` means the environment default (tanh for cart-pole, sigmoid for the grid).
    pub activation: Option<Activation>,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub max_steps: usize,
    pub batch_size: usize,
    pub initial_width: usize,
    pub sampling: BatchSampling,
    pub warmup_samples: u64,
    pub max_width: Option<usize>,
    pub regulation: RegulatoryConstants,
    /// Per-feature `[lo, hi]`; `None` means the environment default.
    pub normalization_bounds: Option<Vec<[f64; 2]>>,
    /// Width of the fixed encoder. `None` means "the width an evolved encoder reaches on the same seed".
    pub aqn_fixed_width: Option<usize>,
    pub input_mode: InputMode,
}

impl Default for AeSection {
    fn default() -> Self {
        Self {
            activation: None,
            optimizer: OptimizerKind::Adam,
            lr: 0.01,
            max_steps: 2000,
            batch_size: 32,
            initial_width: 1,
            sampling: BatchSampling::Sequential,
            warmup_samples: 10,
            max_width: None,
            regulation: RegulatoryConstants::default(),
            normalization_bounds: None,
            aqn_fixed_width: None,
            input_mode: InputMode::Latent,
        }
    }
}

/// Grid environment section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub max_steps: usize,
    pub goal_reward: f64,
    pub step_penalty: f64,
    pub random_start: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        let p = GridParams::default();
        Self {
            max_steps: p.max_steps,
            goal_reward: p.goal_reward,
            step_penalty: p.step_penalty,
            random_start: p.random_start,
        }
    }
}

impl GridSection {
    pub fn params(&self) -> GridParams {
        GridParams {
            max_steps: self.max_steps,
            goal_reward: self.goal_reward,
            step_penalty: self.step_penalty,
            random_start: self.random_start,
            ..GridParams::default()
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_budget() -> usize {
    500
}
fn default_collection() -> usize {
    5000
}
fn default_true() -> bool {
    true
}
fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvKind,
    pub agent: AgentKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_budget")]
    pub episode_budget: usize,
    /// Rolling-100 solve level; cart-pole defaults to 195, the grid has none.
    #[serde(default)]
    pub solve_threshold: Option<f64>,
    #[serde(default = "default_true")]
    pub stop_on_solve: bool,
    #[serde(default = "default_collection")]
    pub observation_collection_steps: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub ae: AeSection,
    #[serde(default)]
    pub qn: QnConfig,
    #[serde(default)]
    pub grid: GridSection,
}

impl ExperimentConfig {
    /// Defaults for `environment` and `agent`.
    pub fn new(environment: EnvKind, agent: AgentKind) -> Self {
        Self {
            environment,
            agent,
            seeds: default_seeds(),
            episode_budget: default_budget(),
            solve_threshold: None,
            stop_on_solve: true,
            observation_collection_steps: default_collection(),
            output_dir: default_output(),
            ae: AeSection::default(),
            qn: QnConfig::default(),
            grid: GridSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds: at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("seeds: {} appears more than once", w[0])));
        }
        if self.observation_collection_steps == 0 {
            return Err(Error::Config("observation_collection_steps must be at least 1".into()));
        }
        if let Some(t) = self.solve_threshold {
            if !t.is_finite() {
                return Err(Error::Config("solve_threshold must be finite".into()));
            }
        }
        let ae = &self.ae;
        if self.ae_activation() == Activation::Relu && self.uses_encoder() {
            return Err(Error::Config(
                "ae.activation: relu has no closed-form expectation, so the encoder cannot evolve".into(),
            ));
        }
        if !(ae.lr > 0.0 && ae.lr.is_finite()) {
            return Err(Error::Config("ae.lr must be positive".into()));
        }
        if ae.max_steps == 0 || ae.batch_size == 0 || ae.initial_width == 0 {
            return Err(Error::Config("ae.max_steps, ae.batch_size and ae.initial_width must be positive".into()));
        }
        if ae.max_width.is_some_and(|m| m < ae.initial_width) {
            return Err(Error::Config("ae.max_width is below ae.initial_width".into()));
        }
        if ae.aqn_fixed_width == Some(0) {
            return Err(Error::Config("ae.aqn_fixed_width must be positive".into()));
        }
        ae.regulation.validate()?;
        if let Some(b) = &ae.normalization_bounds {
            if b.len() != self.observation_dim() {
                return Err(Error::Config(format!(
                    "ae.normalization_bounds: expected {} entries, got {}",
                    self.observation_dim(),
                    b.len()
                )));
            }
        }
        self.normalizer()?;
        self.qn.validate()?;
        if self.environment == EnvKind::Grid {
            let g = &self.grid;
            if g.max_steps == 0 || !g.goal_reward.is_finite() || !g.step_penalty.is_finite() {
                return Err(Error::Config("grid: max_steps must be positive and rewards finite".into()));
            }
        }
        Ok(())
    }

    fn uses_encoder(&self) -> bool {
        self.agent.uses_encoder()
    }

    pub fn observation_dim(&self) -> usize {
        match self.environment {
            EnvKind::Cartpole => CARTPOLE_OBS_BOUNDS.len(),
            EnvKind::Grid => GRID_OBS_DIM,
        }
    }

    pub fn default_activation(&self) -> Activation {
        match self.environment {
            EnvKind::Cartpole => Activation::Tanh,
            EnvKind::Grid => Activation::Sigmoid,
        }
    }

    pub fn ae_activation(&self) -> Activation {
        self.ae.activation.unwrap_or(self.default_activation())
    }

    pub fn qn_activation(&self) -> Activation {
        self.qn.activation.unwrap_or(self.default_activation())
    }

    pub fn effective_threshold(&self) -> Option<f64> {
        match (self.solve_threshold, self.environment) {
            (Some(t), _) => Some(t),
            (None, EnvKind::Cartpole) => Some(195.0),
            (None, EnvKind::Grid) => None,
        }
    }

    pub fn normalizer(&self) -> Result<Normalizer> {
        let bounds = match &self.ae.normalization_bounds {
            Some(b) => b.iter().map(|&[lo, hi]| (lo, hi)).collect(),
            None => match self.environment {
                EnvKind::Cartpole => CARTPOLE_OBS_BOUNDS.iter().map(|&b| (-b, b)).collect(),
                EnvKind::Grid => vec![(0.0, 1.0); GRID_OBS_DIM],
            },
        };
        Normalizer::for_activation(bounds, self.ae_activation())
    }

    pub fn ae_optimizer(&self) -> OptimizerConfig {
        match self.ae.optimizer {
            OptimizerKind::Sgd => OptimizerConfig::sgd(self.ae.lr),
            OptimizerKind::Adam => OptimizerConfig::adam(self.ae.lr),
        }
    }

    pub fn pretrain_config(&self, evolve: bool) -> PretrainConfig {
        PretrainConfig {
            max_steps: self.ae.max_steps,
            batch_size: self.ae.batch_size,
            sampling: self.ae.sampling,
            evolve,
            constants: self.ae.regulation,
            warmup_samples: self.ae.warmup_samples,
            max_width: self.ae.max_width,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut qn = self.qn.clone();
        qn.activation = Some(self.qn_activation());
        TrainConfig {
            qn,
            episodes: self.episode_budget,
            solve_threshold: self.effective_threshold(),
            stop_on_solve: self.stop_on_solve,
        }
    }

    /// SHA-256 over the canonical (key-sorted) JSON form.
    pub fn hash(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let canonical = serde_json::to_string(&value)?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
