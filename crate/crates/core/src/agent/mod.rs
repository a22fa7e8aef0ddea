//! Q-network agents over raw or encoded observations.

mod encoder;
mod epsilon;
mod qnetwork;
mod replay;
mod train;

pub use encoder::{InputMode, Normalizer, StateEncoder};
pub use epsilon::{argmax, select_action, EpsilonSchedule};
pub use qnetwork::{sync_target, QGradients, QNetwork, QParams, TargetNetwork};
pub use replay::{ReplayMemory, Transition};
pub use train::{
    collect_observations, td_target, train_agent, train_step, AgentKind, EpisodeLog, QnConfig, TrainConfig,
    TrainOutcome, EPISODE_CSV_HEADER,
};
