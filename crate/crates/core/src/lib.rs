//! Self-evolving autoencoder embedded Q-network.
//!
//! A tied-weight autoencoder is pre-trained on observations from a random
//! agent while its hidden layer grows and prunes units under a bias/variance
//! regulator. The frozen encoder then maps raw observations to latent states
//! for a deep Q-network. Plain-QN and fixed-width-autoencoder baselines run
//! through the same pipeline.

pub mod agent;
pub mod env;
pub mod error;
pub mod evolving_ae;
pub mod harness;
pub mod metrics;
pub mod numerics;

pub use error::{Error, Result};
