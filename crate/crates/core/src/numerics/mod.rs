//! Dense linear algebra, seeded randomness, activations, closed-form
//! Gaussian expectations, streaming statistics and optimizers.

mod activation;
mod init;
mod matrix;
mod optim;
mod probit;
mod rng;
mod stats;

pub use activation::{activate, sigmoid, Activation};
pub use init::{xavier_bound, xavier_uniform, xavier_uniform_row};
pub use matrix::{affine, Matrix};
pub use optim::{optimizer_step, Optimizer, OptimizerConfig};
pub use probit::{probit_expectation_sigmoid, probit_expectation_tanh};
pub use rng::SeededRng;
pub use stats::{welford_update, OnlineStats};
