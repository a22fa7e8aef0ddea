//! Tied-weight autoencoder whose hidden layer grows and shrinks under a
//! bias/variance regulator, plus the pre-training loop that drives it.

mod autoencoder;
mod pretrain;
mod regulation;
mod tracker;

pub use autoencoder::{AeGradients, EvolvingAutoencoder};
pub use pretrain::{
    pretrain, pretrain_with_tracker, regulate_sample, BatchSampling, EvolutionEvent, EvolutionEventKind,
    EvolutionLog, PretrainConfig, SampleOutcome,
};
pub use regulation::{bias_variance, dynamic_constants, should_grow, should_prune, BiasVariance};
pub use tracker::{RegulatoryConstants, RegulatoryTracker};
