//! The experiment subcommands: run, the two sweeps, and transcript replay.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use vertcohirf::metrics::{summarize_runs, RunRecord, RunsSummary, StatSummary};
use vertcohirf::rng::mix_seed2;
use vertcohirf::transport::{
    account_bits, decode_message, encode_message, DecodeError, MessagePhase, Payload,
    ProtocolMessage,
};

use crate::config::{DatasetSpec, ExperimentConfig};
use crate::runner::{execute_on_dataset, execute_repetition, rep_seed, RunRow};

/// The content of `results.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultsFile {
    pub master_seed: u64,
    pub repetitions: usize,
    pub runs: Vec<RunRow>,
    pub summary: RunsSummary,
}

/// Executes every repetition of the config and writes `results.json`,
/// `cfh.json`, `cfh.nwk`, and `transcript.bin` (hierarchy and transcript
/// from repetition 0) into the output directory.
pub fn cmd_run(config: &ExperimentConfig) -> Result<ResultsFile> {
    let out_dir = config.output_dir();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut rows = Vec::with_capacity(config.run.repetitions);
    for rep in 0..config.run.repetitions {
        let output = execute_repetition(config, rep)?;
        if rep == 0 {
            std::fs::write(out_dir.join("cfh.json"), output.result.cfh.to_json())?;
            std::fs::write(out_dir.join("cfh.nwk"), output.result.cfh.to_newick())?;
            write_transcript(&output.result.transcript, &out_dir.join("transcript.bin"))?;
            if config.run.dump_dataset {
                dump_dataset(config, rep, &out_dir)?;
            }
        }
        rows.push(output.row);
    }

    let records: Vec<RunRecord> = rows
        .iter()
        .map(|r| RunRecord {
            ari: r.ari,
            silhouette: r.silhouette,
            bits_per_round: r.bits_per_round.clone(),
        })
        .collect();
    let results = ResultsFile {
        master_seed: config.run.master_seed,
        repetitions: config.run.repetitions,
        runs: rows,
        summary: summarize_runs(&records)?,
    };
    let json = serde_json::to_string_pretty(&results)?;
    std::fs::write(out_dir.join("results.json"), json)?;
    Ok(results)
}

fn dump_dataset(config: &ExperimentConfig, rep: usize, out_dir: &Path) -> Result<()> {
    let seed = rep_seed(config.run.master_seed, rep);
    let (dataset, generator) = match &config.dataset {
        spec @ DatasetSpec::Blobs { .. } => (
            crate::runner::build_blobs(spec, config.agents.len(), seed)?.0,
            "blobs",
        ),
        spec @ DatasetSpec::Multimodal { .. } => {
            (crate::runner::build_dataset(spec, seed)?, "multimodal")
        }
        spec @ DatasetSpec::Csv { .. } => (crate::runner::build_dataset(spec, seed)?, "csv"),
    };
    vertcohirf::datagen::save_csv(&dataset, &out_dir.join("dataset.csv"))?;
    let c = dataset
        .labels
        .as_ref()
        .map(|l| l.iter().map(|&v| v as usize + 1).max().unwrap_or(0));
    vertcohirf::datagen::write_meta(
        &vertcohirf::datagen::DatasetMeta {
            n: dataset.n(),
            p: dataset.p(),
            c,
            seed,
            generator: generator.to_string(),
        },
        &out_dir.join("dataset.meta.json"),
    )?;
    Ok(())
}

fn write_transcript(transcript: &[ProtocolMessage], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for msg in transcript {
        let bytes = encode_message(msg)?;
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One point of the Byzantine robustness curve.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ByzantineSweepRow {
    pub sigma: f64,
    pub mode: String,
    pub mean_ari: f64,
    pub sd: f64,
    pub trials: usize,
}

pub const RANK_ATTACK_MODES: [&str; 3] = ["rank_reverse", "rank_promote_worst", "rank_shuffle"];

/// Sweeps the blob noise level with and without a single ranking attacker.
/// Honest and attacked runs of the same trial share all seeds, so the
/// comparison is paired. The attacker is the first agent configured with a
/// `rank_*` behavior, or the last agent otherwise; phase 1 stays honest.
pub fn cmd_sweep_byzantine(
    config: &ExperimentConfig,
    sigmas: &[f64],
    trials: usize,
    out_path: Option<&Path>,
) -> Result<Vec<ByzantineSweepRow>> {
    let DatasetSpec::Blobs { .. } = &config.dataset else {
        bail!("the byzantine sweep needs a blob dataset");
    };
    if trials == 0 {
        bail!("need at least one trial");
    }
    for &sigma in sigmas {
        if !(sigma > 0.0 && sigma <= 1.0) {
            bail!("sigma values must lie in (0, 1], got {sigma}");
        }
    }
    let attacker = config
        .agents
        .iter()
        .position(|a| a.behavior.starts_with("rank_"))
        .unwrap_or(config.agents.len() - 1);

    let mut modes = vec!["honest".to_string()];
    modes.extend(RANK_ATTACK_MODES.iter().map(|m| m.to_string()));

    let mut rows = Vec::new();
    for (si, &sigma) in sigmas.iter().enumerate() {
        for mode in &modes {
            let mut aris = Vec::with_capacity(trials);
            for trial in 0..trials {
                let mut trial_config = config.clone();
                if let DatasetSpec::Blobs { sigma: s, .. } = &mut trial_config.dataset {
                    *s = sigma;
                }
                for agent in &mut trial_config.agents {
                    agent.behavior = "honest".into();
                }
                if mode != "honest" {
                    trial_config.agents[attacker].behavior = mode.clone();
                }
                trial_config.run.master_seed =
                    mix_seed2(config.run.master_seed, si as u64, trial as u64);
                trial_config.run.repetitions = 1;
                let output = execute_repetition(&trial_config, 0)?;
                aris.push(
                    output
                        .row
                        .ari
                        .context("byzantine sweep needs the ari metric enabled")?,
                );
            }
            let stats = StatSummary::from_values(&aris).expect("trials >= 1");
            rows.push(ByzantineSweepRow {
                sigma,
                mode: mode.clone(),
                mean_ari: stats.mean,
                sd: stats.sd,
                trials,
            });
        }
    }
    if let Some(path) = out_path {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["sigma", "mode", "mean_ari", "sd", "trials"])?;
        for row in &rows {
            writer.write_record([
                row.sigma.to_string(),
                row.mode.clone(),
                row.mean_ari.to_string(),
                row.sd.to_string(),
                row.trials.to_string(),
            ])?;
        }
        writer.flush()?;
    }
    Ok(rows)
}

/// One point of the agent-count curve.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AgentSweepRow {
    pub agents: usize,
    pub mean_ari: f64,
    pub sd: f64,
    pub splits: usize,
    /// Raw per-split scores behind the aggregate columns.
    pub split_aris: Vec<f64>,
}

/// Varies the number of agents over independent feature partitions drawn
/// with 20% sharing under the 30% overlap cap. The first configured agent
/// serves as the template for every agent of the sweep.
pub fn cmd_sweep_agents(
    config: &ExperimentConfig,
    agent_grid: &[usize],
    splits: usize,
    out_path: Option<&Path>,
) -> Result<Vec<AgentSweepRow>> {
    if splits == 0 {
        bail!("need at least one split");
    }
    let template = config
        .agents
        .first()
        .context("need a template agent")?
        .clone();
    // One fixed dataset for the whole sweep.
    let dataset = crate::runner::build_dataset(&config.dataset, rep_seed(config.run.master_seed, 0))?;
    let p = dataset.p();

    let mut rows = Vec::new();
    for &agents in agent_grid {
        if agents == 0 || p < agents {
            bail!("cannot spread {p} features over {agents} agents");
        }
        let mut aris = Vec::with_capacity(splits);
        for split in 0..splits {
            let partition = vertcohirf::datagen::partition_features(
                p,
                agents,
                0.2,
                0.3,
                mix_seed2(config.run.master_seed, agents as u64, split as u64),
            )?;
            let mut sweep_config = config.clone();
            sweep_config.agents = (0..agents)
                .map(|_| {
                    let mut spec = template.clone();
                    spec.features = None;
                    spec
                })
                .collect();
            sweep_config.run.master_seed =
                mix_seed2(config.run.master_seed, 1000 + agents as u64, split as u64);
            sweep_config.run.repetitions = 1;
            let output = execute_on_dataset(&sweep_config, &dataset, &partition.sets, 0)?;
            aris.push(
                output
                    .row
                    .ari
                    .context("agent sweep needs the ari metric enabled")?,
            );
        }
        let stats = StatSummary::from_values(&aris).expect("splits >= 1");
        rows.push(AgentSweepRow {
            agents,
            mean_ari: stats.mean,
            sd: stats.sd,
            splits,
            split_aris: aris,
        });
    }
    if let Some(path) = out_path {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["agents", "mean_ari", "sd", "splits"])?;
        for row in &rows {
            writer.write_record([
                row.agents.to_string(),
                row.mean_ari.to_string(),
                row.sd.to_string(),
                row.splits.to_string(),
            ])?;
        }
        writer.flush()?;
    }
    Ok(rows)
}

/// Per-round audit of a replayed transcript.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReplayRound {
    pub round: u32,
    pub messages: usize,
    pub label_bits: u64,
    pub medlist_bits: u64,
    pub bound: u64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReplaySummary {
    pub messages: usize,
    pub agents: usize,
    pub rounds: Vec<ReplayRound>,
}

/// Decodes a binary transcript dump and re-derives the per-round bit
/// accounting and bound audit.
pub fn cmd_replay(path: &Path) -> Result<ReplaySummary> {
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    let mut messages = Vec::new();
    let mut offset = 0usize;
    while offset < buf.len() {
        if buf.len() - offset < 4 {
            return Err(DecodeError {
                offset,
                kind: vertcohirf::transport::DecodeErrorKind::Truncated,
            }
            .into());
        }
        let len = u32::from_le_bytes(buf[offset..offset + 4].try_into().unwrap()) as usize;
        offset += 4;
        if buf.len() - offset < len {
            return Err(DecodeError {
                offset: buf.len(),
                kind: vertcohirf::transport::DecodeErrorKind::Truncated,
            }
            .into());
        }
        messages.push(decode_message(&buf[offset..offset + len])?);
        offset += len;
    }

    let agents = messages
        .iter()
        .map(|m| m.sender as usize + 1)
        .max()
        .unwrap_or(0);
    // The first label round covers the full sample range.
    let n = messages
        .iter()
        .filter(|m| m.round == 1 && m.phase == MessagePhase::Labels)
        .map(|m| match &m.payload {
            Payload::Labels(l) => l.len(),
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    let max_round = messages.iter().map(|m| m.round).max().unwrap_or(0);
    let mut rounds = Vec::new();
    for round in 1..=max_round {
        let round_msgs: Vec<&ProtocolMessage> =
            messages.iter().filter(|m| m.round == round).collect();
        let report = account_bits(round, &round_msgs, agents, n, None)?;
        rounds.push(ReplayRound {
            round,
            messages: round_msgs.len(),
            label_bits: report.label_bits,
            medlist_bits: report.medlist_bits,
            bound: report.bound(),
            within_bound: report.within_bound(),
        });
    }
    Ok(ReplaySummary {
        messages: messages.len(),
        agents,
        rounds,
    })
}

/// Renders the replay audit as the text the CLI prints.
pub fn format_replay(summary: &ReplaySummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} messages from {} agents over {} rounds\n",
        summary.messages,
        summary.agents,
        summary.rounds.len()
    ));
    out.push_str("round  msgs  label_bits  medlist_bits  bound  ok\n");
    for r in &summary.rounds {
        out.push_str(&format!(
            "{:>5}  {:>4}  {:>10}  {:>12}  {:>5}  {}\n",
            r.round,
            r.messages,
            r.label_bits,
            r.medlist_bits,
            r.bound,
            if r.within_bound { "yes" } else { "NO" }
        ));
    }
    out
}

/// Reads back a transcript written by [`cmd_run`]; test support.
pub fn read_transcript(path: &Path) -> Result<Vec<ProtocolMessage>> {
    let summary = cmd_replay(path)?;
    let _ = summary;
    let buf = std::fs::read(path)?;
    let mut messages = Vec::new();
    let mut offset = 0usize;
    while offset < buf.len() {
        let len = u32::from_le_bytes(buf[offset..offset + 4].try_into().unwrap()) as usize;
        offset += 4;
        messages.push(decode_message(&buf[offset..offset + len])?);
        offset += len;
    }
    Ok(messages)
}

/// Writes a curve CSV for arbitrary rows; used by main for stdout copies.
pub fn write_rows_csv<W: Write>(mut w: W, rows: &[ByzantineSweepRow]) -> Result<()> {
    writeln!(w, "sigma,mode,mean_ari,sd,trials")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.sigma, r.mode, r.mean_ari, r.sd, r.trials
        )?;
    }
    Ok(())
}
