use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::OnlineStats;

/// Coefficients of the grow/prune inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatoryConstants {
    pub alpha_bias: f64,
    pub beta_bias: f64,
    pub alpha_var: f64,
    pub beta_var: f64,
    pub prune_multiplier: f64,
}

impl Default for RegulatoryConstants {
    fn default() -> Self {
        Self {
            alpha_bias: 1.3,
            beta_bias: 1.0,
            alpha_var: 1.3,
            beta_var: 0.7,
            prune_multiplier: 2.0,
        }
    }
}

impl RegulatoryConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha_bias", self.alpha_bias),
            ("beta_bias", self.beta_bias),
            ("alpha_var", self.alpha_var),
            ("beta_var", self.beta_var),
            ("prune_multiplier", self.prune_multiplier),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("regulation.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Running statistics that drive hidden-layer growth and pruning.
///
/// Holds per-feature input moments (used to propagate a Gaussian through the
/// encoder), running moments of the per-sample bias² and variance, and the
/// minima those moments are compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegulatoryTracker {
    input_stats: Vec<OnlineStats>,
    bias_stats: OnlineStats,
    var_stats: OnlineStats,
    min_bias_mean: f64,
    min_bias_std: f64,
    min_var_mean: f64,
    min_var_std: f64,
    reset_bias_minima: bool,
    reset_var_minima: bool,
    grew_flag: bool,
    // test hook: fixed input moments instead of streamed ones
    #[serde(skip)]
    fixed_input: Option<(Vec<f64>, Vec<f64>)>,
}

impl RegulatoryTracker {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_stats: vec![OnlineStats::new(); input_dim],
            bias_stats: OnlineStats::new(),
            var_stats: OnlineStats::new(),
            min_bias_mean: 0.0,
            min_bias_std: 0.0,
            min_var_mean: 0.0,
            min_var_std: 0.0,
            reset_bias_minima: true,
            reset_var_minima: true,
            grew_flag: false,
            fixed_input: None,
        }
    }

    /// Tracker whose input moments are pinned to the given values.
    pub fn with_input_moments(mean: &[f64], var: &[f64]) -> Self {
        let mut t = Self::new(mean.len());
        t.fixed_input = Some((mean.to_vec(), var.to_vec()));
        t
    }

    pub fn observe_input(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_stats.len() {
            return Err(Error::dim(
                "observe_input",
                format!("len {}", x.len()),
                format!("tracker width {}", self.input_stats.len()),
            ));
        }
        for (s, &v) in self.input_stats.iter_mut().zip(x) {
            s.update(v);
        }
        Ok(())
    }

    pub fn inputs_seen(&self) -> u64 {
        self.input_stats.first().map_or(0, |s| s.count())
    }

    /// Per-feature `(mean, variance)` of the inputs seen so far.
    pub fn input_moments(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some((m, v)) = &self.fixed_input {
            return Ok((m.clone(), v.clone()));
        }
        if self.inputs_seen() == 0 {
            return Err(Error::State("tracker has not observed any input".into()));
        }
        Ok((
            self.input_stats.iter().map(|s| s.mean()).collect(),
            self.input_stats.iter().map(|s| s.variance()).collect(),
        ))
    }

    /// Folds one sample's bias² and variance into the running moments and
    /// refreshes the minima (or resets them after a grow/prune).
    pub fn record(&mut self, bias_sq: f64, variance: f64) {
        self.bias_stats.update(bias_sq);
        self.var_stats.update(variance);
        let (bm, bs) = (self.bias_stats.mean(), self.bias_stats.std());
        if self.reset_bias_minima {
            self.min_bias_mean = bm;
            self.min_bias_std = bs;
            self.reset_bias_minima = false;
        } else {
            self.min_bias_mean = self.min_bias_mean.min(bm);
            self.min_bias_std = self.min_bias_std.min(bs);
        }
        let (vm, vs) = (self.var_stats.mean(), self.var_stats.std());
        if self.reset_var_minima {
            self.min_var_mean = vm;
            self.min_var_std = vs;
            self.reset_var_minima = false;
        } else {
            self.min_var_mean = self.min_var_mean.min(vm);
            self.min_var_std = self.min_var_std.min(vs);
        }
    }

    /// Forces both minima to be re-seeded from the next recorded sample.
    pub fn reset_minima(&mut self) {
        self.reset_bias_minima = true;
        self.reset_var_minima = true;
    }

    pub(crate) fn on_grow(&mut self) {
        self.min_bias_mean = self.bias_stats.mean();
        self.min_bias_std = self.bias_stats.std();
        self.grew_flag = true;
    }

    pub(crate) fn on_prune(&mut self) {
        self.min_var_mean = self.var_stats.mean();
        self.min_var_std = self.var_stats.std();
    }

    pub fn clear_grew_flag(&mut self) {
        self.grew_flag = false;
    }

    pub fn grew_flag(&self) -> bool {
        self.grew_flag
    }

    pub fn samples_recorded(&self) -> u64 {
        self.bias_stats.count()
    }

    pub fn bias_mean(&self) -> f64 {
        self.bias_stats.mean()
    }
    pub fn bias_std(&self) -> f64 {
        self.bias_stats.std()
    }
    pub fn var_mean(&self) -> f64 {
        self.var_stats.mean()
    }
    pub fn var_std(&self) -> f64 {
        self.var_stats.std()
    }
    pub fn min_bias_mean(&self) -> f64 {
        self.min_bias_mean
    }
    pub fn min_bias_std(&self) -> f64 {
        self.min_bias_std
    }
    pub fn min_var_mean(&self) -> f64 {
        self.min_var_mean
    }
    pub fn min_var_std(&self) -> f64 {
        self.min_var_std
    }

    /// Overwrites every running and minimum moment. Used to set up exact
    /// inequality scenarios.
    #[allow(clippy::too_many_arguments)]
    pub fn set_moments(
        &mut self,
        bias: (f64, f64),
        min_bias: (f64, f64),
        var: (f64, f64),
        min_var: (f64, f64),
        grew_flag: bool,
    ) {
        self.bias_stats = synthetic_stats(bias.0, bias.1);
        self.var_stats = synthetic_stats(var.0, var.1);
        (self.min_bias_mean, self.min_bias_std) = min_bias;
        (self.min_var_mean, self.min_var_std) = min_var;
        self.reset_bias_minima = false;
        self.reset_var_minima = false;
        self.grew_flag = grew_flag;
    }
}

/// Two-point stream with the requested mean and population std.
fn synthetic_stats(mean: f64, std: f64) -> OnlineStats {
    let mut s = OnlineStats::new();
    s.update(mean - std);
    s.update(mean + std);
    s
}
