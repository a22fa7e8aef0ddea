use super::rng::SeededRng;
use crate::error::{Error, Result};

/// Xavier-uniform half-width `sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Draws `fan_in` values from the Xavier-uniform law.
///
/// One call produces the incoming weights of a single new unit.
pub fn xavier_uniform_row(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    xavier_uniform(fan_in, fan_in, fan_out, rng)
}

/// `n` Xavier-uniform draws for a layer of shape `fan_in × fan_out`.
pub fn xavier_uniform(n: usize, fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Domain(format!(
            "xavier init needs positive fans, got ({fan_in}, {fan_out})"
        )));
    }
    let bound = xavier_bound(fan_in, fan_out);
    Ok((0..n).map(|_| rng.uniform(-bound, bound)).collect())
}
