//! Cross-simulation evaluation metrics over episode logs.

use serde::{Deserialize, Serialize};

use crate::agent::EpisodeLog;
use crate::error::{Error, Result};

pub const WINDOW: usize = 100;

/// Per-episode rewards and wall times of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    rewards: Vec<f64>,
    times: Vec<f64>,
}

impl SimulationTrace {
    pub fn new(rewards: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::Input("simulation trace is empty".into()));
        }
        if rewards.len() != times.len() {
            return Err(Error::dim(
                "simulation trace",
                format!("{} rewards", rewards.len()),
                format!("{} times", times.len()),
            ));
        }
        Ok(Self { rewards, times })
    }

    /// Trace with zero wall times.
    pub fn from_rewards(rewards: Vec<f64>) -> Result<Self> {
        let n = rewards.len();
        Self::new(rewards, vec![0.0; n])
    }

    pub fn from_logs(logs: &[EpisodeLog]) -> Result<Self> {
        Self::new(
            logs.iter().map(|l| l.total_reward).collect(),
            logs.iter().map(|l| l.wall_time_s).collect(),
        )
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Earliest 1-based episode whose rolling window reaches `thr`.
    pub fn convergence_episode(&self, thr: f64) -> Result<Option<usize>> {
        if self.rewards.len() < WINDOW {
            return Err(Error::UndefinedWindow {
                needed: WINDOW,
                have: self.rewards.len(),
            });
        }
        for x in WINDOW..=self.rewards.len() {
            if rolling_avg_100(&self.rewards, x)? >= thr {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    pub fn final_rolling_avg(&self) -> Result<f64> {
        rolling_avg_100(&self.rewards, self.rewards.len())
    }
}

/// Mean of the 100 rewards ending at 1-based episode `end`.
pub fn rolling_avg_100(rewards: &[f64], end: usize) -> Result<f64> {
    if end < WINDOW || end > rewards.len() {
        return Err(Error::UndefinedWindow {
            needed: WINDOW,
            have: end.min(rewards.len()),
        });
    }
    Ok(rewards[end - WINDOW..end].iter().sum::<f64>() / WINDOW as f64)
}

/// Simulations whose final rolling average reaches `thr` (inclusive).
pub fn ncs(traces: &[SimulationTrace], thr: f64) -> Result<usize> {
    let mut n = 0;
    for t in traces {
        if t.final_rolling_avg()? >= thr {
            n += 1;
        }
    }
    Ok(n)
}

/// First-convergence episodes of the simulations that converge.
pub fn convergence_episodes(traces: &[SimulationTrace], thr: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for t in traces {
        if let Some(x) = t.convergence_episode(thr)? {
            out.push(x as f64);
        }
    }
    Ok(out)
}

/// Mean first-convergence episode over converged simulations.
pub fn aec(traces: &[SimulationTrace], thr: f64) -> Result<f64> {
    let xs = convergence_episodes(traces, thr)?;
    if xs.is_empty() {
        return Err(Error::UndefinedMetric("aec: no simulation converged"));
    }
    Ok(mean(&xs))
}

/// Per-simulation total wall time.
pub fn total_times(traces: &[SimulationTrace]) -> Vec<f64> {
    traces.iter().map(|t| t.times.iter().sum()).collect()
}

pub fn att(traces: &[SimulationTrace]) -> Result<f64> {
    nonempty(traces)?;
    Ok(mean(&total_times(traces)))
}

/// Per-simulation mean episode reward.
pub fn mean_rewards(traces: &[SimulationTrace]) -> Vec<f64> {
    traces.iter().map(|t| mean(&t.rewards)).collect()
}

/// Per-simulation summed episode reward.
pub fn total_rewards(traces: &[SimulationTrace]) -> Vec<f64> {
    traces.iter().map(|t| t.rewards.iter().sum()).collect()
}

/// Average over simulations of the per-episode mean reward.
pub fn ar(traces: &[SimulationTrace]) -> Result<f64> {
    nonempty(traces)?;
    Ok(mean(&mean_rewards(traces)))
}

/// Average over simulations of the summed reward, without per-episode normalization.
pub fn ar_raw(traces: &[SimulationTrace]) -> Result<f64> {
    nonempty(traces)?;
    Ok(mean(&total_rewards(traces)))
}

fn nonempty(traces: &[SimulationTrace]) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::Input("no simulation traces".into()));
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    // shifted by the first value so a constant sample has an exact mean
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Summary across simulations. Convergence fields are `None` without a
/// threshold, or when no simulation converged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ncs: Option<usize>,
    pub n_sims: usize,
    pub aec_mean: Option<f64>,
    pub aec_std: Option<f64>,
    pub att_mean: f64,
    pub att_std: f64,
    pub ar_mean: f64,
    pub ar_std: f64,
    pub thr: Option<f64>,
    /// Summed-reward variant of AR.
    pub ar_raw_mean: f64,
    pub ar_raw_std: f64,
}

impl MetricsReport {
    pub fn compute(traces: &[SimulationTrace], thr: Option<f64>) -> Result<Self> {
        nonempty(traces)?;
        let (ncs_v, aec_xs) = match thr {
            Some(thr) => {
                // a short trace can never have converged; report it as such
                let long: Vec<SimulationTrace> = traces.iter().filter(|t| t.len() >= WINDOW).cloned().collect();
                (Some(ncs(&long, thr)?), convergence_episodes(&long, thr)?)
            }
            None => (None, Vec::new()),
        };
        let times = total_times(traces);
        let ars = mean_rewards(traces);
        let raws = total_rewards(traces);
        let some_if = |v: f64| (!aec_xs.is_empty()).then_some(v);
        Ok(Self {
            ncs: ncs_v,
            n_sims: traces.len(),
            aec_mean: some_if(mean(&aec_xs)),
            aec_std: some_if(std_dev(&aec_xs)),
            att_mean: mean(&times),
            att_std: std_dev(&times),
            ar_mean: mean(&ars),
            ar_std: std_dev(&ars),
            thr,
            ar_raw_mean: mean(&raws),
            ar_raw_std: std_dev(&raws),
        })
    }
}
