use std::io::Write;

use serde::{Deserialize, Serialize};

use super::autoencoder::EvolvingAutoencoder;
use super::regulation::{bias_variance, dynamic_constants, should_grow, should_prune};
use super::tracker::{RegulatoryConstants, RegulatoryTracker};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

/// How batches are drawn from the observation memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchSampling {
    /// Uniform draws with replacement.
    Shuffled,
    /// Consecutive slices, wrapping at the end. Preserves stream order.
    #[default]
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub max_steps: usize,
    pub batch_size: usize,
    pub sampling: BatchSampling,
    /// When false the width stays fixed and only the reconstruction is trained.
    pub evolve: bool,
    pub constants: RegulatoryConstants,
    /// Samples recorded before grow/prune decisions start.
    pub warmup_samples: u64,
    /// Optional hard ceiling on the hidden width.
    pub max_width: Option<usize>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            max_steps: 2000,
            batch_size: 32,
            sampling: BatchSampling::Sequential,
            evolve: true,
            constants: RegulatoryConstants::default(),
            warmup_samples: 10,
            max_width: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionEventKind {
    Grow,
    Prune,
    Loss,
}

/// One line of the evolution log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionEvent {
    pub step: usize,
    pub event: EvolutionEventKind,
    pub r: usize,
    pub loss: Option<f64>,
    pub bias_sq: f64,
    pub variance: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub events: Vec<EvolutionEvent>,
    /// Output dimensions whose variance estimate was clamped at zero.
    pub clamped_variance: u64,
}

impl EvolutionLog {
    pub fn grow_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.events_of(EvolutionEventKind::Grow)
    }

    pub fn prune_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.events_of(EvolutionEventKind::Prune)
    }

    fn events_of(&self, kind: EvolutionEventKind) -> impl Iterator<Item = usize> + '_ {
        self.events.iter().filter(move |e| e.event == kind).map(|e| e.step)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.event == EvolutionEventKind::Loss)
            .filter_map(|e| e.loss)
            .collect()
    }

    pub fn final_width(&self) -> Option<usize> {
        self.events.last().map(|e| e.r)
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n").map_err(|e| Error::io("<evolution log>", e))?;
        }
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            events,
            clamped_variance: 0,
        })
    }
}

/// What the regulator did with one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub bias_sq: f64,
    pub variance: f64,
    pub d1: f64,
    pub d2: f64,
    pub grew: bool,
    pub pruned: Option<usize>,
    pub clamped: usize,
}

/// Runs the statistics and grow/prune rules for a single input row.
pub fn regulate_sample(
    ae: &mut EvolvingAutoencoder,
    tracker: &mut RegulatoryTracker,
    x: &[f64],
    config: &PretrainConfig,
    rng: &mut SeededRng,
) -> Result<SampleOutcome> {
    tracker.observe_input(x)?;
    let (mu, var) = ae.preactivation_stats(tracker)?;
    let expected_latent = ae.expected_latent(&mu, &var)?;
    let (ex, ex2) = ae.expected_outputs(&expected_latent)?;
    let bv = bias_variance(&Matrix::row_vector(x), &ex, &ex2)?;

    let warming = tracker.samples_recorded() < config.warmup_samples;
    if warming {
        tracker.reset_minima();
    }
    tracker.record(bv.bias_sq, bv.variance);
    let (d1, d2) = dynamic_constants(bv.bias_sq, bv.variance, &config.constants);

    let mut outcome = SampleOutcome {
        bias_sq: bv.bias_sq,
        variance: bv.variance,
        d1,
        d2,
        grew: false,
        pruned: None,
        clamped: bv.clamped,
    };
    if warming || !config.evolve {
        tracker.clear_grew_flag();
        return Ok(outcome);
    }

    let below_cap = config.max_width.is_none_or(|cap| ae.width() < cap);
    if below_cap && should_grow(tracker, d1) {
        ae.grow_node(tracker, rng)?;
        outcome.grew = true;
    } else {
        tracker.clear_grew_flag();
    }
    if should_prune(tracker, d2, ae.width(), &config.constants) {
        outcome.pruned = Some(ae.prune_node(tracker)?);
    }
    Ok(outcome)
}

fn draw_batch(memory: &[Vec<f64>], config: &PretrainConfig, step: usize, rng: &mut SeededRng) -> Vec<usize> {
    let n = memory.len();
    match config.sampling {
        BatchSampling::Shuffled => (0..config.batch_size).map(|_| rng.below(n)).collect(),
        BatchSampling::Sequential => (0..config.batch_size)
            .map(|i| (step * config.batch_size + i) % n)
            .collect(),
    }
}

/// Pre-trains the autoencoder on a memory of observations.
///
/// Each step draws a batch; every sample in it updates the regulator (and
/// may grow or prune a hidden unit), then one gradient step is taken on the
/// whole batch.
pub fn pretrain(
    ae: &mut EvolvingAutoencoder,
    memory: &[Vec<f64>],
    config: &PretrainConfig,
    rng: &mut SeededRng,
) -> Result<EvolutionLog> {
    let mut tracker = RegulatoryTracker::new(ae.input_dim());
    pretrain_with_tracker(ae, &mut tracker, memory, config, rng)
}

pub fn pretrain_with_tracker(
    ae: &mut EvolvingAutoencoder,
    tracker: &mut RegulatoryTracker,
    memory: &[Vec<f64>],
    config: &PretrainConfig,
    rng: &mut SeededRng,
) -> Result<EvolutionLog> {
    if memory.is_empty() {
        return Err(Error::Input("observation memory is empty".into()));
    }
    if config.max_steps == 0 {
        return Err(Error::Input("max_steps must be at least 1".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Input("batch_size must be at least 1".into()));
    }
    let d = ae.input_dim();
    if let Some(bad) = memory.iter().find(|x| x.len() != d) {
        return Err(Error::dim("pretrain memory", format!("row len {}", bad.len()), format!("width {d}")));
    }

    let mut log = EvolutionLog::default();
    let mut last_loss = None;
    for step in 0..config.max_steps {
        let idx = draw_batch(memory, config, step, rng);
        let (mut sum_b, mut sum_v, mut sum_d1, mut sum_d2) = (0.0, 0.0, 0.0, 0.0);
        for &i in &idx {
            let x = &memory[i];
            let o = regulate_sample(ae, tracker, x, config, rng)?;
            log.clamped_variance += o.clamped as u64;
            sum_b += o.bias_sq;
            sum_v += o.variance;
            sum_d1 += o.d1;
            sum_d2 += o.d2;
            let mut push = |event| {
                log.events.push(EvolutionEvent {
                    step,
                    event,
                    r: ae.width(),
                    loss: last_loss,
                    bias_sq: o.bias_sq,
                    variance: o.variance,
                    d1: o.d1,
                    d2: o.d2,
                })
            };
            if o.grew {
                push(EvolutionEventKind::Grow);
            }
            if o.pruned.is_some() {
                push(EvolutionEventKind::Prune);
            }
        }

        let mut data = Vec::with_capacity(idx.len() * d);
        for &i in &idx {
            data.extend_from_slice(&memory[i]);
        }
        let batch = Matrix::from_vec(idx.len(), d, data)?;
        let loss = ae.reconstruction_step(&batch)?;
        last_loss = Some(loss);
        let n = idx.len() as f64;
        log.events.push(EvolutionEvent {
            step,
            event: EvolutionEventKind::Loss,
            r: ae.width(),
            loss: Some(loss),
            bias_sq: sum_b / n,
            variance: sum_v / n,
            d1: sum_d1 / n,
            d2: sum_d2 / n,
        });
        debug_assert!(ae.is_consistent());
    }
    Ok(log)
}
