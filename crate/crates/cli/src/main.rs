use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use vertcohirf_cli::commands::{
    cmd_replay, cmd_run, cmd_sweep_agents, cmd_sweep_byzantine, format_replay,
};
use vertcohirf_cli::config::ExperimentConfig;
use vertcohirf_cli::hpo::cmd_hpo;

#[derive(Parser)]
#[command(
    name = "vertcohirf",
    about = "Decentralized vertical federated clustering experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write result artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep blob noise with and without a single ranking attacker.
    SweepByzantine {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated noise levels in (0, 1].
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 0.5, 0.75, 1.0])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Sweep the agent count over independent feature partitions.
    SweepAgents {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated agent counts.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4, 5, 6])]
        agents: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        splits: usize,
    },
    /// Random-search hyperparameter optimization for tuned agents.
    Hpo {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the trial count from the config.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Decode a transcript dump and audit its communication bits.
    Replay { transcript: PathBuf },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let results = cmd_run(&config)?;
            let out = config.output_dir();
            println!(
                "wrote {} runs to {}",
                results.runs.len(),
                out.join("results.json").display()
            );
            if let Some(ari) = &results.summary.ari {
                println!("ari: mean {:.4} sd {:.4}", ari.mean, ari.sd);
            }
            if let Some(sil) = &results.summary.silhouette {
                println!("silhouette: mean {:.4} sd {:.4}", sil.mean, sil.sd);
            }
        }
        Command::SweepByzantine {
            config,
            sigmas,
            trials,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let out_dir = config.output_dir();
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("byzantine_sweep.csv");
            let rows = cmd_sweep_byzantine(&config, &sigmas, trials, Some(&path))?;
            println!("wrote {} curve points to {}", rows.len(), path.display());
        }
        Command::SweepAgents {
            config,
            agents,
            splits,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let out_dir = config.output_dir();
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("agents_sweep.csv");
            let rows = cmd_sweep_agents(&config, &agents, splits, Some(&path))?;
            println!("wrote {} curve points to {}", rows.len(), path.display());
        }
        Command::Hpo { config, trials } => {
            let config = ExperimentConfig::load(&config)?;
            let outcome = cmd_hpo(&config, trials)?;
            let out_dir = config.output_dir();
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("hpo.json");
            std::fs::write(&path, serde_json::to_string_pretty(&outcome)?)?;
            let best = outcome
                .best_config
                .as_ref()
                .context("search returned no winner")?;
            let best_path = out_dir.join("hpo_best.toml");
            std::fs::write(&best_path, toml::to_string_pretty(best)?)?;
            println!(
                "best {} = {:.4} at trial {}; wrote {} and {}",
                outcome.metric,
                outcome.best_score,
                outcome.best_trial,
                path.display(),
                best_path.display()
            );
        }
        Command::Replay { transcript } => {
            let summary = cmd_replay(&transcript)?;
            print!("{}", format_replay(&summary));
            if summary.rounds.iter().any(|r| !r.within_bound) {
                anyhow::bail!("transcript exceeds the communication bound");
            }
        }
    }
    Ok(())
}
