//! Discrete-action environments behind a common reset/step contract.

mod cartpole;
mod grid;
mod trajectory;

pub use cartpole::{CartPole, CartPoleAction, CartPoleParams, CartPoleState, CARTPOLE_OBS_BOUNDS};
pub use grid::{bfs_shortest_path, GridAction, GridParams, GridState, GridWorld, Heading, GRID_OBS_DIM};
pub use trajectory::TrajectoryRecorder;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::SeededRng;

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode is over, for any reason.
    pub done: bool,
    /// The episode ended only because the step cap was hit. The final state is
    /// not terminal, so value targets should still bootstrap from it.
    pub truncated: bool,
}

impl EnvStep {
    /// Ended in a genuinely terminal state.
    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

pub trait Environment {
    fn observation_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64>;
    fn step(&mut self, action: usize) -> Result<EnvStep>;
    fn observation(&self) -> Vec<f64>;
    fn is_done(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Cartpole,
    Grid,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Cartpole => "cartpole",
            EnvKind::Grid => "grid",
        }
    }
}

/// Owned environment of either kind.
#[derive(Debug, Clone)]
pub enum AnyEnv {
    CartPole(CartPole),
    Grid(GridWorld),
}

impl AnyEnv {
    pub fn new(kind: EnvKind, grid: GridParams) -> Self {
        match kind {
            EnvKind::Cartpole => AnyEnv::CartPole(CartPole::new(CartPoleParams::default())),
            EnvKind::Grid => AnyEnv::Grid(GridWorld::new(grid)),
        }
    }

    fn inner(&self) -> &dyn Environment {
        match self {
            AnyEnv::CartPole(e) => e,
            AnyEnv::Grid(e) => e,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Environment {
        match self {
            AnyEnv::CartPole(e) => e,
            AnyEnv::Grid(e) => e,
        }
    }
}

impl Environment for AnyEnv {
    fn observation_dim(&self) -> usize {
        self.inner().observation_dim()
    }
    fn action_count(&self) -> usize {
        self.inner().action_count()
    }
    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64> {
        self.inner_mut().reset(rng)
    }
    fn step(&mut self, action: usize) -> Result<EnvStep> {
        self.inner_mut().step(action)
    }
    fn observation(&self) -> Vec<f64> {
        self.inner().observation()
    }
    fn is_done(&self) -> bool {
        self.inner().is_done()
    }
}
