use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::encoder::StateEncoder;
use super::epsilon::{select_action, EpsilonSchedule};
use super::qnetwork::{sync_target, QNetwork, TargetNetwork};
use super::replay::{ReplayMemory, Transition};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::metrics::rolling_avg_100;
use crate::numerics::{Activation, Matrix, OptimizerConfig, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Q-network on raw observations.
    Qn,
    /// Q-network on a fixed-width pre-trained encoder.
    Aqn,
    /// Q-network on an evolved pre-trained encoder.
    Saqn,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Qn, AgentKind::Aqn, AgentKind::Saqn];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Qn => "qn",
            AgentKind::Aqn => "aqn",
            AgentKind::Saqn => "saqn",
        }
    }

    pub fn uses_encoder(self) -> bool {
        !matches!(self, AgentKind::Qn)
    }
}

/// Q-learning hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnConfig {
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between gradient updates.
    pub train_interval: u64,
    /// Environment steps between target syncs.
    pub sync_interval: u64,
    /// Transitions stored before updates begin (never fewer than one batch).
    pub learning_starts: usize,
    pub lr: f64,
    pub hidden: usize,
    /// Hidden activation; `None` means the environment's default.
    pub activation: Option<Activation>,
}

impl Default for QnConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            epsilon: EpsilonSchedule::default(),
            buffer_capacity: 50_000,
            batch_size: 64,
            train_interval: 1,
            sync_interval: 500,
            learning_starts: 64,
            lr: 1e-3,
            hidden: 256,
            activation: None,
        }
    }
}

impl QnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("qn.{field}: {why}")));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", "must lie in (0, 1)");
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) || e.end > e.start {
            return bad("epsilon", "needs 0 <= end <= start <= 1");
        }
        if self.buffer_capacity == 0 {
            return bad("buffer_capacity", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if self.train_interval == 0 {
            return bad("train_interval", "must be positive");
        }
        if self.sync_interval == 0 {
            return bad("sync_interval", "must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr", "must be positive");
        }
        if self.hidden == 0 {
            return bad("hidden", "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub qn: QnConfig,
    pub episodes: usize,
    /// Rolling-100 average that counts as solved.
    pub solve_threshold: Option<f64>,
    /// End the run as soon as the threshold is reached.
    pub stop_on_solve: bool,
}

/// One row of the episode CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub total_reward: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub wall_time_s: f64,
    /// Mean training loss over the episode; `None` before updates begin.
    pub loss_mean: Option<f64>,
}

pub const EPISODE_CSV_HEADER: &str = "episode,total_reward,steps,epsilon,wall_time_s,loss_mean";

impl EpisodeLog {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.episode,
            self.total_reward,
            self.steps,
            self.epsilon,
            self.wall_time_s,
            self.loss_mean.map(|l| l.to_string()).unwrap_or_default()
        )
    }

    pub fn write_csv<W: Write>(logs: &[EpisodeLog], mut out: W) -> Result<()> {
        let io = |e| Error::io("<episode csv>", e);
        writeln!(out, "{EPISODE_CSV_HEADER}").map_err(io)?;
        for l in logs {
            writeln!(out, "{}", l.csv_row()).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Vec<EpisodeLog>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == EPISODE_CSV_HEADER => {}
            other => return Err(Error::Input(format!("unexpected episode CSV header {other:?}"))),
        }
        lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                let f: Vec<&str> = line.split(',').collect();
                let bad = || Error::Input(format!("episode CSV row {}: {line:?}", i + 2));
                if f.len() != 6 {
                    return Err(bad());
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
                Ok(EpisodeLog {
                    episode: f[0].parse().map_err(|_| bad())?,
                    total_reward: num(f[1])?,
                    steps: f[2].parse().map_err(|_| bad())?,
                    epsilon: num(f[3])?,
                    wall_time_s: num(f[4])?,
                    loss_mean: if f[5].is_empty() { None } else { Some(num(f[5])?) },
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub episodes: Vec<EpisodeLog>,
    pub network: QNetwork,
    pub total_steps: u64,
    /// Environment step counts at which the target network was synced.
    pub sync_steps: Vec<u64>,
    pub updates: u64,
    pub first_observation: Vec<f64>,
    /// Width of the state vectors stored in replay.
    pub state_width: usize,
    /// Episode (1-based) at which the rolling-100 threshold was first met.
    pub solved_at: Option<usize>,
}

/// Bootstrapped regression target for one transition.
pub fn td_target(reward: f64, next_state: &[f64], done: bool, gamma: f64, target: &TargetNetwork) -> Result<f64> {
    if done {
        return Ok(reward);
    }
    let q = target.q_values(next_state)?;
    Ok(reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn stack(rows: impl ExactSizeIterator<Item = impl AsRef<[f64]>>, width: usize) -> Result<Matrix> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * width);
    for r in rows {
        data.extend_from_slice(r.as_ref());
    }
    Matrix::from_vec(n, width, data)
}

/// One update on the mean squared TD error. Returns the loss before the update.
pub fn train_step(net: &mut QNetwork, target: &TargetNetwork, batch: &[&Transition], gamma: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Input("empty training batch".into()));
    }
    let width = net.params().input_dim();
    let next = stack(batch.iter().map(|t| &t.next_state), width)?;
    let (_, q_next) = target.params().forward(&next)?;
    let targets: Vec<f64> = batch
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.done {
                t.reward
            } else {
                t.reward + gamma * q_next.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    let states = stack(batch.iter().map(|t| &t.state), width)?;
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let (loss, grads) = net.params().loss_and_gradients(&states, &actions, &targets)?;
    net.apply_gradients(&grads)?;
    Ok(loss)
}

/// Raw observations visited by a uniformly random policy, resetting on episode end.
pub fn collect_observations<E: Environment + ?Sized>(env: &mut E, n_steps: usize, rng: &mut SeededRng) -> Result<Vec<Vec<f64>>> {
    if n_steps == 0 {
        return Err(Error::Input("n_steps must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n_steps);
    out.push(env.reset(rng));
    while out.len() < n_steps {
        if env.is_done() {
            out.push(env.reset(rng));
            continue;
        }
        let action = rng.below(env.action_count());
        out.push(env.step(action)?.observation);
    }
    Ok(out)
}

/// Trains one agent. Sub-streams of `rng`'s seed drive network init, environment
/// resets and exploration/replay sampling, so the same seed yields the same
/// episode starts for every agent kind.
pub fn train_agent<E: Environment + ?Sized>(
    kind: AgentKind,
    env: &mut E,
    encoder: Option<&StateEncoder>,
    config: &TrainConfig,
    rng: &SeededRng,
) -> Result<TrainOutcome> {
    let qn = &config.qn;
    qn.validate()?;
    let encoder = match (kind, encoder) {
        (AgentKind::Qn, _) => None,
        (_, Some(e)) => Some(e),
        (_, None) => return Err(Error::Config(format!("agent {} needs a pre-trained encoder", kind.name()))),
    };
    if let Some(e) = encoder {
        if e.input_dim() != env.observation_dim() {
            return Err(Error::dim(
                "train_agent",
                format!("encoder input {}", e.input_dim()),
                format!("observation width {}", env.observation_dim()),
            ));
        }
    }
    let map = |obs: &[f64]| -> Result<Vec<f64>> {
        match encoder {
            Some(e) => e.encode(obs),
            None => Ok(obs.to_vec()),
        }
    };
    let state_width = encoder.map_or(env.observation_dim(), StateEncoder::output_dim);

    let mut init_rng = rng.fork(10);
    let mut env_rng = rng.fork(11);
    let mut act_rng = rng.fork(12);

    let mut net = QNetwork::new(
        state_width,
        qn.hidden,
        env.action_count(),
        qn.activation.unwrap_or(Activation::Tanh),
        OptimizerConfig::adam(qn.lr),
        &mut init_rng,
    )?;
    let mut target = TargetNetwork::from_network(&net);
    let mut memory = ReplayMemory::new(qn.buffer_capacity)?;
    let learning_starts = qn.learning_starts.max(qn.batch_size);

    let mut logs = Vec::with_capacity(config.episodes);
    let mut rewards = Vec::with_capacity(config.episodes);
    let mut sync_steps = Vec::new();
    let mut first_observation = Vec::new();
    let mut t: u64 = 0;
    let mut updates: u64 = 0;
    let mut solved_at = None;

    for episode in 1..=config.episodes {
        let start = Instant::now();
        let raw = env.reset(&mut env_rng);
        if episode == 1 {
            first_observation = raw.clone();
        }
        let mut state = map(&raw)?;
        let (mut total, mut steps, mut loss_sum, mut loss_n) = (0.0, 0usize, 0.0, 0usize);
        loop {
            let eps = qn.epsilon.value(t);
            let q = net.q_values(&state)?;
            let action = select_action(&q, eps, &mut act_rng);
            let step = env.step(action)?;
            t += 1;
            steps += 1;
            total += step.reward;
            let next_state = map(&step.observation)?;
            memory.push(Transition {
                state: std::mem::take(&mut state),
                action,
                reward: step.reward,
                next_state: next_state.clone(),
                done: step.terminal(),
            });
            state = next_state;

            if memory.len() >= learning_starts && t.is_multiple_of(qn.train_interval) {
                let batch = memory.sample(qn.batch_size, &mut act_rng);
                loss_sum += train_step(&mut net, &target, &batch, qn.gamma)?;
                loss_n += 1;
                updates += 1;
            }
            if t.is_multiple_of(qn.sync_interval) {
                sync_target(&net, &mut target);
                sync_steps.push(t);
            }
            if step.done {
                break;
            }
        }
        rewards.push(total);
        logs.push(EpisodeLog {
            episode,
            total_reward: total,
            steps,
            epsilon: qn.epsilon.value(t),
            wall_time_s: start.elapsed().as_secs_f64(),
            loss_mean: (loss_n > 0).then(|| loss_sum / loss_n as f64),
        });
        if solved_at.is_none() {
            if let (Some(thr), Ok(avg)) = (config.solve_threshold, rolling_avg_100(&rewards, rewards.len())) {
                if avg >= thr {
                    solved_at = Some(episode);
                    if config.stop_on_solve {
                        break;
                    }
                }
            }
        }
    }

    Ok(TrainOutcome {
        episodes: logs,
        network: net,
        total_steps: t,
        sync_steps,
        updates,
        first_observation,
        state_width,
        solved_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::qnetwork::QParams;
    use crate::env::{CartPole, CartPoleParams};

    fn tiny_config(episodes: usize) -> TrainConfig {
        TrainConfig {
            qn: QnConfig {
                hidden: 16,
                ..Default::default()
            },
            episodes,
            solve_threshold: None,
            stop_on_solve: false,
        }
    }

    #[test]
    fn td_target_cases() {
        let mut p = QParams::zeros(1, 1, 2, Activation::Tanh);
        p.b2 = Matrix::row_vector(&[2.0, -1.0]);
        let net = QNetwork::from_params(p, OptimizerConfig::sgd(0.1));
        let target = TargetNetwork::from_network(&net);
        assert_eq!(td_target(1.0, &[0.0], true, 0.99, &target).unwrap(), 1.0);
        assert!((td_target(1.0, &[0.0], false, 0.99, &target).unwrap() - 2.98).abs() < 1e-12);
        assert_eq!(td_target(1.0, &[0.0], false, 0.0, &target).unwrap(), 1.0);
    }

    #[test]
    fn consistent_batch_has_zero_loss_and_no_update() {
        let mut rng = SeededRng::new(4);
        let mut net = QNetwork::new(2, 8, 2, Activation::Tanh, OptimizerConfig::adam(1e-2), &mut rng).unwrap();
        let target = TargetNetwork::from_network(&net);
        let s = vec![0.3, -0.2];
        let q = net.q_values(&s).unwrap();
        // terminal transitions whose reward already equals Q(s, a)
        let batch = [
            Transition { state: s.clone(), action: 0, reward: q[0], next_state: s.clone(), done: true },
            Transition { state: s.clone(), action: 1, reward: q[1], next_state: s.clone(), done: true },
        ];
        let refs: Vec<&Transition> = batch.iter().collect();
        let before = net.params().clone();
        assert_eq!(train_step(&mut net, &target, &refs, 0.99).unwrap(), 0.0);
        assert_eq!(net.params(), &before);
    }

    #[test]
    fn collect_exact_count_and_reproducible() {
        let mut env = CartPole::new(CartPoleParams::default());
        let a = collect_observations(&mut env, 100, &mut SeededRng::new(8)).unwrap();
        let b = collect_observations(&mut env, 100, &mut SeededRng::new(8)).unwrap();
        assert_eq!(a.len(), 100);
        assert!(a.iter().all(|s| s.len() == 4));
        assert_eq!(a, b);
        assert!(collect_observations(&mut env, 0, &mut SeededRng::new(8)).is_err());
    }

    #[test]
    fn zero_budget_gives_empty_log() {
        let mut env = CartPole::new(CartPoleParams::default());
        let out = train_agent(AgentKind::Qn, &mut env, None, &tiny_config(0), &SeededRng::new(1)).unwrap();
        assert!(out.episodes.is_empty());
        assert_eq!(out.total_steps, 0);
    }

    #[test]
    fn encoder_required_for_latent_agents() {
        let mut env = CartPole::new(CartPoleParams::default());
        for kind in [AgentKind::Aqn, AgentKind::Saqn] {
            let err = train_agent(kind, &mut env, None, &tiny_config(1), &SeededRng::new(1)).unwrap_err();
            assert!(matches!(err, Error::Config(_)));
        }
    }

    #[test]
    fn sync_fires_on_schedule() {
        let mut env = CartPole::new(CartPoleParams::default());
        let mut cfg = tiny_config(30);
        cfg.qn.sync_interval = 37;
        let out = train_agent(AgentKind::Qn, &mut env, None, &cfg, &SeededRng::new(2)).unwrap();
        let expected: Vec<u64> = (1..=out.total_steps / 37).map(|k| k * 37).collect();
        assert_eq!(out.sync_steps, expected);
        assert_eq!(out.state_width, 4);
    }

    #[test]
    fn csv_round_trip() {
        let logs = vec![
            EpisodeLog { episode: 1, total_reward: 12.0, steps: 12, epsilon: 0.99, wall_time_s: 0.001, loss_mean: None },
            EpisodeLog { episode: 2, total_reward: -0.5, steps: 7, epsilon: 0.5, wall_time_s: 0.25, loss_mean: Some(0.125) },
        ];
        let mut buf = Vec::new();
        EpisodeLog::write_csv(&logs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(EPISODE_CSV_HEADER));
        assert_eq!(EpisodeLog::read_csv(&text).unwrap(), logs);
    }
}
