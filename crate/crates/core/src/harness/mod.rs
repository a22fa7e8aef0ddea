//! Config-driven experiment pipeline: collect, pre-train, train, log, summarize.

mod config;
mod latent;
mod run;

pub use config::{load_config, AeSection, ExperimentConfig, GridSection, OptimizerKind};
pub use latent::{cartpole_label, dump_latents, grid_label, state_label};
pub use run::{
    collect_for_seed, compare_agents, metrics_for, metrics_from_dir, pretrain_seeds, pretrain_encoder, run_experiment, run_seed, write_seed_artifacts,
    AgentSummary, ComparisonReport, PretrainedEncoder, RunManifest, SeedEntry, SeedRun,
};
