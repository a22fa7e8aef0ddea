use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::latent::dump_latents;
use crate::agent::{collect_observations, train_agent, AgentKind, EpisodeLog, StateEncoder};
use crate::env::AnyEnv;
use crate::error::{Error, Result};
use crate::evolving_ae::{pretrain, EvolutionLog, EvolvingAutoencoder};
use crate::metrics::{median, MetricsReport, SimulationTrace};
use crate::numerics::SeededRng;

const COLLECT_STREAM: u64 = 1;
const AE_STREAM: u64 = 2;

/// Raw observations a random policy visits on `seed`.
pub fn collect_for_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut env = AnyEnv::new(cfg.environment, cfg.grid.params());
    collect_observations(&mut env, cfg.observation_collection_steps, &mut SeededRng::new(seed).fork(COLLECT_STREAM))
}

/// A frozen encoder and the log of its pre-training.
#[derive(Debug, Clone)]
pub struct PretrainedEncoder {
    pub encoder: StateEncoder,
    pub log: EvolutionLog,
}

/// Pre-trains an encoder on `memory`. With `fixed_width` the width is frozen
/// at that value; otherwise it evolves from `ae.initial_width`.
pub fn pretrain_encoder(
    cfg: &ExperimentConfig,
    memory: &[Vec<f64>],
    seed: u64,
    fixed_width: Option<usize>,
) -> Result<PretrainedEncoder> {
    let normalizer = cfg.normalizer()?;
    let normalized = memory.iter().map(|x| normalizer.apply(x)).collect::<Result<Vec<_>>>()?;
    let mut rng = SeededRng::new(seed).fork(AE_STREAM);
    let width = fixed_width.unwrap_or(cfg.ae.initial_width);
    let mut ae = EvolvingAutoencoder::new(
        cfg.observation_dim(),
        width,
        cfg.ae_activation(),
        cfg.ae_optimizer(),
        &mut rng,
    )?;
    let log = pretrain(&mut ae, &normalized, &cfg.pretrain_config(fixed_width.is_none()), &mut rng)?;
    Ok(PretrainedEncoder {
        encoder: StateEncoder::new(normalizer, ae, cfg.ae.input_mode)?,
        log,
    })
}

/// Everything produced for one (agent, seed) pair.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub agent: AgentKind,
    pub seed: u64,
    pub memory: Vec<Vec<f64>>,
    pub encoder: Option<PretrainedEncoder>,
    pub episodes: Vec<EpisodeLog>,
    pub first_observation: Vec<f64>,
    pub total_steps: u64,
    pub solved_at: Option<usize>,
}

impl SeedRun {
    pub fn latent_width(&self) -> Option<usize> {
        self.encoder.as_ref().map(|e| e.encoder.autoencoder().width())
    }
}

/// Runs the full pipeline for one seed. For AQN, `aqn_width` (or the config's
/// fixed width) sets the encoder width; when both are absent an evolved encoder
/// is trained first and its final width is used.
pub fn run_seed(cfg: &ExperimentConfig, agent: AgentKind, seed: u64, aqn_width: Option<usize>) -> Result<SeedRun> {
    let memory = collect_for_seed(cfg, seed)?;
    let encoder = match agent {
        AgentKind::Qn => None,
        AgentKind::Saqn => Some(pretrain_encoder(cfg, &memory, seed, None)?),
        AgentKind::Aqn => {
            let width = match aqn_width.or(cfg.ae.aqn_fixed_width) {
                Some(w) => w,
                None => pretrain_encoder(cfg, &memory, seed, None)?.encoder.autoencoder().width(),
            };
            Some(pretrain_encoder(cfg, &memory, seed, Some(width))?)
        }
    };
    let mut env = AnyEnv::new(cfg.environment, cfg.grid.params());
    let out = train_agent(
        agent,
        &mut env,
        encoder.as_ref().map(|e| &e.encoder),
        &cfg.train_config(),
        &SeededRng::new(seed),
    )?;
    Ok(SeedRun {
        agent,
        seed,
        memory,
        encoder,
        episodes: out.episodes,
        first_observation: out.first_observation,
        total_steps: out.total_steps,
        solved_at: out.solved_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub seed: u64,
    pub files: Vec<PathBuf>,
    pub latent_width: Option<usize>,
    pub episodes: usize,
    pub solved_at: Option<usize>,
}

/// Index of one experiment's outputs. Paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub environment: String,
    pub agent: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub complete: bool,
    pub error: Option<String>,
    pub seeds: Vec<SeedEntry>,
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    fn start(cfg: &ExperimentConfig, agent: AgentKind) -> Result<Self> {
        Ok(Self {
            config_hash: cfg.hash()?,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            environment: cfg.environment.name().to_string(),
            agent: agent.name().to_string(),
            started_unix_s: now(),
            finished_unix_s: 0.0,
            complete: false,
            error: None,
            seeds: Vec::new(),
            files: Vec::new(),
        })
    }

    /// Every file listed, seed files first.
    pub fn all_files(&self) -> Vec<PathBuf> {
        self.seeds
            .iter()
            .flat_map(|s| s.files.iter().cloned())
            .chain(self.files.iter().cloned())
            .collect()
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn agent_dir(agent: AgentKind, seed: u64) -> PathBuf {
    PathBuf::from(agent.name()).join(format!("seed_{seed}"))
}

/// Writes a seed's artifacts under `root` and returns their relative paths.
pub fn write_seed_artifacts(root: &Path, cfg: &ExperimentConfig, run: &SeedRun) -> Result<Vec<PathBuf>> {
    let rel = agent_dir(run.agent, run.seed);
    create_dir(&root.join(&rel))?;
    let mut files = Vec::new();

    let mut csv = Vec::new();
    EpisodeLog::write_csv(&run.episodes, &mut csv)?;
    write_file(&root.join(rel.join("episodes.csv")), &csv)?;
    files.push(rel.join("episodes.csv"));

    if let Some(enc) = &run.encoder {
        let mut jsonl = Vec::new();
        enc.log.write_jsonl(&mut jsonl)?;
        write_file(&root.join(rel.join("evolution.jsonl")), &jsonl)?;
        files.push(rel.join("evolution.jsonl"));

        let mut latents = Vec::new();
        dump_latents(&enc.encoder, cfg.environment, &run.memory, &mut latents)?;
        write_file(&root.join(rel.join("latents.csv")), &latents)?;
        files.push(rel.join("latents.csv"));

        write_json(&root.join(rel.join("encoder.json")), &enc.encoder)?;
        files.push(rel.join("encoder.json"));
    }
    Ok(files)
}

fn seed_entry(run: &SeedRun, files: Vec<PathBuf>) -> SeedEntry {
    SeedEntry {
        seed: run.seed,
        files,
        latent_width: run.latent_width(),
        episodes: run.episodes.len(),
        solved_at: run.solved_at,
    }
}

fn traces(runs: &[SeedRun]) -> Result<Vec<SimulationTrace>> {
    runs.iter().map(|r| SimulationTrace::from_logs(&r.episodes)).collect()
}

/// Metrics for a set of runs; empty episode logs are skipped.
pub fn metrics_for(cfg: &ExperimentConfig, runs: &[SeedRun]) -> Result<MetricsReport> {
    let nonempty: Vec<SeedRun> = runs.iter().filter(|r| !r.episodes.is_empty()).cloned().collect();
    MetricsReport::compute(&traces(&nonempty)?, cfg.effective_threshold())
}

fn finish_manifest(root: &Path, manifest: &mut RunManifest, name: &str, result: &Result<()>) -> Result<()> {
    manifest.finished_unix_s = now();
    manifest.complete = result.is_ok();
    manifest.error = result.as_ref().err().map(|e| e.to_string());
    write_json(&root.join(name), manifest)
}

/// Runs every seed of `cfg.agent`, writing artifacts under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(RunManifest, Vec<SeedRun>)> {
    cfg.validate()?;
    let root = cfg.output_dir.clone();
    create_dir(&root)?;
    let mut manifest = RunManifest::start(cfg, cfg.agent)?;
    let mut runs = Vec::new();
    let result = (|| {
        for &seed in &cfg.seeds {
            let run = run_seed(cfg, cfg.agent, seed, None)?;
            let files = write_seed_artifacts(&root, cfg, &run)?;
            manifest.seeds.push(seed_entry(&run, files));
            runs.push(run);
        }
        let report = metrics_for(cfg, &runs)?;
        let rel = PathBuf::from(cfg.agent.name()).join("metrics.json");
        write_json(&root.join(&rel), &report)?;
        manifest.files.push(rel);
        Ok(())
    })();
    let manifest_name = format!("manifest_{}.json", cfg.agent.name());
    finish_manifest(&root, &mut manifest, &manifest_name, &result)?;
    result?;
    Ok((manifest, runs))
}

/// One agent's row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: String,
    pub metrics: MetricsReport,
    /// Per-seed first-convergence episode (`None` if the seed never converged).
    pub convergence: Vec<Option<usize>>,
    pub aec_median: Option<f64>,
    /// Mean reward over each seed's first and last 100 episodes.
    pub first_100_ar: Vec<f64>,
    pub final_100_ar: Vec<f64>,
    pub latent_widths: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub environment: String,
    pub seeds: Vec<u64>,
    pub thr: Option<f64>,
    pub agents: Vec<AgentSummary>,
    /// Every agent saw the same first observation on every seed.
    pub shared_first_observations: bool,
}

impl ComparisonReport {
    pub fn agent(&self, kind: AgentKind) -> Option<&AgentSummary> {
        self.agents.iter().find(|a| a.agent == kind.name())
    }

    /// Plain-text table in the shape of the usual NCS / AEC / ATT / AR summary.
    pub fn table(&self) -> String {
        let fmt = |m: Option<f64>, s: Option<f64>| match (m, s) {
            (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
            _ => "n/a".to_string(),
        };
        let mut out = format!(
            "{:<6} {:>8} {:>20} {:>20} {:>20}\n",
            "agent", "NCS", "AEC", "ATT (s)", "AR"
        );
        for a in &self.agents {
            let m = &a.metrics;
            let ncs = m.ncs.map_or("n/a".to_string(), |n| format!("{n}/{}", m.n_sims));
            out.push_str(&format!(
                "{:<6} {:>8} {:>20} {:>20} {:>20}\n",
                a.agent,
                ncs,
                fmt(m.aec_mean, m.aec_std),
                fmt(Some(m.att_mean), Some(m.att_std)),
                fmt(Some(m.ar_mean), Some(m.ar_std)),
            ));
        }
        out
    }
}

fn window_mean(rewards: &[f64], first: bool) -> f64 {
    let n = rewards.len().min(100);
    let w = if first { &rewards[..n] } else { &rewards[rewards.len() - n..] };
    if w.is_empty() {
        f64::NAN
    } else {
        w.iter().sum::<f64>() / n as f64
    }
}

fn summarize(cfg: &ExperimentConfig, agent: AgentKind, runs: &[SeedRun]) -> Result<AgentSummary> {
    let metrics = metrics_for(cfg, runs)?;
    let convergence: Vec<Option<usize>> = runs
        .iter()
        .map(|r| match (cfg.effective_threshold(), SimulationTrace::from_logs(&r.episodes)) {
            (Some(thr), Ok(t)) => t.convergence_episode(thr).ok().flatten(),
            _ => None,
        })
        .collect();
    let converged: Vec<f64> = convergence.iter().flatten().map(|&x| x as f64).collect();
    let rewards: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| r.episodes.iter().map(|e| e.total_reward).collect())
        .collect();
    Ok(AgentSummary {
        agent: agent.name().to_string(),
        metrics,
        convergence,
        aec_median: median(&converged),
        first_100_ar: rewards.iter().map(|r| window_mean(r, true)).collect(),
        final_100_ar: rewards.iter().map(|r| window_mean(r, false)).collect(),
        latent_widths: runs.iter().map(SeedRun::latent_width).collect(),
    })
}

/// Runs QN, AQN and SAQN on the same seeds. AQN's encoder width on each seed
/// is the width SAQN's encoder evolved to on that seed.
pub fn compare_agents(cfg: &ExperimentConfig) -> Result<(ComparisonReport, RunManifest)> {
    cfg.validate()?;
    let root = cfg.output_dir.clone();
    create_dir(&root)?;
    let mut manifest = RunManifest::start(cfg, cfg.agent)?;
    manifest.agent = "compare".into();
    let mut report = None;
    let result = (|| {
        let mut by_agent: Vec<(AgentKind, Vec<SeedRun>)> = AgentKind::ALL.iter().map(|&k| (k, Vec::new())).collect();
        for &seed in &cfg.seeds {
            let saqn = run_seed(cfg, AgentKind::Saqn, seed, None)?;
            let aqn = run_seed(cfg, AgentKind::Aqn, seed, saqn.latent_width())?;
            let qn = run_seed(cfg, AgentKind::Qn, seed, None)?;
            for run in [qn, aqn, saqn] {
                let files = write_seed_artifacts(&root, cfg, &run)?;
                manifest.seeds.push(seed_entry(&run, files));
                let slot = by_agent.iter_mut().find(|(k, _)| *k == run.agent).expect("every kind has a slot");
                slot.1.push(run);
            }
        }
        let mut agents = Vec::new();
        for (kind, runs) in &by_agent {
            let summary = summarize(cfg, *kind, runs)?;
            let rel = PathBuf::from(kind.name()).join("metrics.json");
            write_json(&root.join(&rel), &summary.metrics)?;
            manifest.files.push(rel);
            agents.push(summary);
        }
        let shared = (0..cfg.seeds.len()).all(|i| {
            let first = &by_agent[0].1[i].first_observation;
            by_agent.iter().all(|(_, runs)| &runs[i].first_observation == first)
        });
        let r = ComparisonReport {
            environment: cfg.environment.name().to_string(),
            seeds: cfg.seeds.clone(),
            thr: cfg.effective_threshold(),
            agents,
            shared_first_observations: shared,
        };
        write_json(&root.join("comparison.json"), &r)?;
        manifest.files.push(PathBuf::from("comparison.json"));
        report = Some(r);
        Ok(())
    })();
    finish_manifest(&root, &mut manifest, "manifest_compare.json", &result)?;
    result?;
    Ok((report.expect("set on success"), manifest))
}

/// Recomputes metrics from the episode CSVs an earlier run left in `cfg.output_dir`.
pub fn metrics_from_dir(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    let mut traces = Vec::new();
    for &seed in &cfg.seeds {
        let path = cfg.output_dir.join(agent_dir(cfg.agent, seed)).join("episodes.csv");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let logs = EpisodeLog::read_csv(&text)?;
        if !logs.is_empty() {
            traces.push(SimulationTrace::from_logs(&logs)?);
        }
    }
    let report = MetricsReport::compute(&traces, cfg.effective_threshold())?;
    write_json(&cfg.output_dir.join(cfg.agent.name()).join("metrics.json"), &report)?;
    Ok(report)
}

/// Pre-trains the encoder for `cfg.agent` on every seed and writes its
/// evolution log and parameters, plus the latent dump when `latents` is set.
pub fn pretrain_seeds(cfg: &ExperimentConfig, latents: bool) -> Result<Vec<(u64, PretrainedEncoder)>> {
    cfg.validate()?;
    let root = &cfg.output_dir;
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let memory = collect_for_seed(cfg, seed)?;
        let fixed = match cfg.agent {
            AgentKind::Aqn => cfg.ae.aqn_fixed_width,
            _ => None,
        };
        let enc = pretrain_encoder(cfg, &memory, seed, fixed)?;
        let rel = agent_dir(cfg.agent, seed);
        create_dir(&root.join(&rel))?;
        let mut jsonl = Vec::new();
        enc.log.write_jsonl(&mut jsonl)?;
        write_file(&root.join(rel.join("evolution.jsonl")), &jsonl)?;
        write_json(&root.join(rel.join("encoder.json")), &enc.encoder)?;
        if latents {
            let mut buf = Vec::new();
            dump_latents(&enc.encoder, cfg.environment, &memory, &mut buf)?;
            write_file(&root.join(rel.join("latents.csv")), &buf)?;
        }
        out.push((seed, enc));
    }
    Ok(out)
}
