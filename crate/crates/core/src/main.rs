use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saqn::harness::{compare_agents, load_config, metrics_from_dir, pretrain_seeds, run_experiment, ExperimentConfig};
use saqn::Error;

#[derive(Parser)]
#[command(name = "saqn", version, about = "Evolving-autoencoder Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect observations and pre-train the encoder for each seed.
    Pretrain(Common),
    /// Run the full pipeline for the configured agent.
    Train(Common),
    /// Run QN, AQN and SAQN on shared seeds and report side by side.
    Compare(Common),
    /// Pre-train encoders and write labelled latent vectors.
    DumpLatents(Common),
    /// Recompute metrics from episode logs already in the output directory.
    Metrics(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = load_config(&common.config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn runtime(e: Error) -> Failure {
    match e {
        Error::Config(m) => Failure::Config(m),
        other => Failure::Runtime(other.to_string()),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Pretrain(c) => {
            let cfg = load(&c)?;
            for (seed, enc) in pretrain_seeds(&cfg, false).map_err(runtime)? {
                let log = &enc.log;
                println!(
                    "seed {seed}: width {} ({} grow, {} prune), final loss {:.6}",
                    enc.encoder.autoencoder().width(),
                    log.grow_steps().count(),
                    log.prune_steps().count(),
                    log.losses().last().copied().unwrap_or(f64::NAN)
                );
            }
        }
        Command::DumpLatents(c) => {
            let cfg = load(&c)?;
            for (seed, enc) in pretrain_seeds(&cfg, true).map_err(runtime)? {
                println!("seed {seed}: wrote {} latent columns", enc.encoder.autoencoder().width());
            }
        }
        Command::Train(c) => {
            let cfg = load(&c)?;
            let (manifest, runs) = run_experiment(&cfg).map_err(runtime)?;
            for run in &runs {
                println!(
                    "{} seed {}: {} episodes, solved at {:?}, latent width {:?}",
                    run.agent.name(),
                    run.seed,
                    run.episodes.len(),
                    run.solved_at,
                    run.latent_width()
                );
            }
            println!("{} files under {}", manifest.all_files().len(), cfg.output_dir.display());
        }
        Command::Compare(c) => {
            let cfg = load(&c)?;
            let (report, _) = compare_agents(&cfg).map_err(runtime)?;
            print!("{}", report.table());
        }
        Command::Metrics(c) => {
            let cfg = load(&c)?;
            let report = metrics_from_dir(&cfg).map_err(runtime)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
