use serde::{Deserialize, Serialize};

/// Streaming mean and variance (Welford's recurrence).
///
/// Variance uses the population convention, `m2 / count`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OnlineStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl OnlineStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        // rounding can push m2 a hair below zero on constant streams
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Functional form of [`OnlineStats::update`].
pub fn welford_update(mut stats: OnlineStats, x: f64) -> OnlineStats {
    stats.update(x);
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn single_value() {
        let s = welford_update(OnlineStats::new(), 5.0);
        assert_eq!(s.mean(), 5.0);
        assert_eq!(s.variance(), 0.0);
    }

    #[test]
    fn small_stream_matches_batch() {
        let s = [1.0, 2.0, 3.0].iter().fold(OnlineStats::new(), |s, &x| welford_update(s, x));
        assert!((s.mean() - 2.0).abs() < 1e-15);
        assert!((s.variance() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_values_keep_exact_mean() {
        let mut s = OnlineStats::new();
        for _ in 0..1000 {
            s.update(0.1);
        }
        assert_eq!(s.mean(), 0.1);
        assert!(s.variance() >= 0.0);
    }

    #[test]
    fn random_stream_matches_batch() {
        let mut rng = SeededRng::new(5);
        let xs: Vec<f64> = (0..1000).map(|_| rng.uniform(-50.0, 120.0)).collect();
        let mut s = OnlineStats::new();
        xs.iter().for_each(|&x| s.update(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((s.mean() - mean).abs() <= 1e-9 * mean.abs());
        assert!((s.variance() - var).abs() <= 1e-9 * var);
    }

    proptest! {
        #[test]
        fn variance_never_negative(xs in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let mut s = OnlineStats::new();
            for x in &xs {
                s.update(*x);
                prop_assert!(s.variance() >= 0.0);
            }
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            prop_assert!((s.variance() - var).abs() <= 1e-9 * var.max(1.0));
        }
    }
}
