//! Bias/variance estimates of the reconstruction and the grow/prune rules
//! built on them.

use super::tracker::{RegulatoryConstants, RegulatoryTracker};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Scalar bias² and variance of one reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVariance {
    pub bias_sq: f64,
    pub variance: f64,
    /// Output dimensions where `E[X̂²] − E[X̂]²` came out negative and was clamped.
    pub clamped: usize,
}

/// Per-dimension `(E[X̂] − x)²` and `E[X̂²] − E[X̂]²`, each averaged over the
/// output dimensions.
pub fn bias_variance(x: &Matrix, ex: &Matrix, ex2: &Matrix) -> Result<BiasVariance> {
    if x.shape() != ex.shape() || ex.shape() != ex2.shape() {
        return Err(Error::dim(
            "bias_variance",
            x.shape_str(),
            format!("{} / {}", ex.shape_str(), ex2.shape_str()),
        ));
    }
    let n = x.data().len().max(1) as f64;
    let mut bias_sq = 0.0;
    let mut variance = 0.0;
    let mut clamped = 0;
    for ((&xv, &e), &e2) in x.data().iter().zip(ex.data()).zip(ex2.data()) {
        bias_sq += (e - xv).powi(2);
        let v = e2 - e * e;
        if v < 0.0 {
            clamped += 1;
        } else {
            variance += v;
        }
    }
    Ok(BiasVariance {
        bias_sq: bias_sq / n,
        variance: variance / n,
        clamped,
    })
}

/// `(d1, d2)` scaling the minimum standard deviations in the grow and prune
/// inequalities. The variance enters `d2` squared.
pub fn dynamic_constants(bias_sq: f64, variance: f64, k: &RegulatoryConstants) -> (f64, f64) {
    let d1 = k.alpha_bias * (-bias_sq).exp() + k.beta_bias;
    let d2 = k.alpha_var * (-(variance * variance)).exp() + k.beta_var;
    (d1, d2)
}

/// `μ_bias + σ_bias ≥ μ_bias_min + d1·σ_bias_min`.
pub fn should_grow(tracker: &RegulatoryTracker, d1: f64) -> bool {
    tracker.bias_mean() + tracker.bias_std() >= tracker.min_bias_mean() + d1 * tracker.min_bias_std()
}

/// `μ_var + σ_var ≥ μ_var_min + m·d2·σ_var_min`, suppressed right after a grow
/// and when only one hidden unit is left.
pub fn should_prune(tracker: &RegulatoryTracker, d2: f64, width: usize, k: &RegulatoryConstants) -> bool {
    if tracker.grew_flag() || width <= 1 {
        return false;
    }
    tracker.var_mean() + tracker.var_std()
        >= tracker.min_var_mean() + k.prune_multiplier * d2 * tracker.min_var_std()
}
