//! Closed-form Gaussian expectations of squashing activations.
//!
//! For `F ~ N(mu, var)` the logistic-normal integral is approximated by
//! rescaling the mean: `E[sigmoid(F)] ≈ sigmoid(mu / sqrt(1 + π·var/8))`.
//! The tanh form follows from `tanh(F) = 2·sigmoid(2F) − 1`.

use std::f64::consts::PI;

use super::activation::sigmoid;
use crate::error::{Error, Result};

fn check_var(var: f64) -> Result<()> {
    if var < 0.0 || var.is_nan() {
        return Err(Error::Domain(format!("variance must be non-negative, got {var}")));
    }
    Ok(())
}

/// Approximate `E[tanh(F)]` for `F ~ N(mu, var)`.
pub fn probit_expectation_tanh(mu: f64, var: f64) -> Result<f64> {
    check_var(var)?;
    Ok(2.0 * sigmoid(2.0 * mu / (1.0 + PI * var / 2.0).sqrt()) - 1.0)
}

/// Approximate `E[sigmoid(F)]` for `F ~ N(mu, var)`.
pub fn probit_expectation_sigmoid(mu: f64, var: f64) -> Result<f64> {
    check_var(var)?;
    Ok(sigmoid(mu / (1.0 + PI * var / 8.0).sqrt()))
}
