//! Seeded random-search hyperparameter optimization.
//!
//! Each trial samples fresh parameters for every agent marked `tune = true`
//! (all agents when none are marked) from the fixed search spaces below,
//! runs the configured repetitions, and scores the mean of the target
//! metric. Random search over the same bounds replaces model-based
//! samplers; at these problem sizes only the bounds matter.

use anyhow::{bail, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use vertcohirf::cluster::StrategyKind;
use vertcohirf::rng::{mix_seed, rng_from};

use crate::config::{ExperimentConfig, HpoSpec};
use crate::runner::execute_repetition;

// Search spaces: q% in [0.1, 1.0], repetitions in [2, 10], eps in
// [0.1, 10], min_samples in [2, 50], k in [2, 30], gamma in [0.1, 30].
const Q_RANGE: (f64, f64) = (0.1, 1.0);
const REPS_RANGE: (usize, usize) = (2, 10);
const EPS_RANGE: (f64, f64) = (0.1, 10.0);
const MIN_SAMPLES_RANGE: (usize, usize) = (2, 50);
const K_RANGE: (usize, usize) = (2, 30);
const GAMMA_RANGE: (f64, f64) = (0.1, 30.0);

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub score: Option<f64>,
    /// Sampled strategy per tuned agent, by agent index.
    pub sampled: Vec<(usize, StrategyKind, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HpoOutcome {
    pub best_trial: usize,
    pub best_score: f64,
    pub metric: String,
    pub trials: Vec<TrialRecord>,
    /// The input config with the winning parameters substituted.
    #[serde(skip)]
    pub best_config: Option<ExperimentConfig>,
}

fn sample_float(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    range.0 + rng.random::<f64>() * (range.1 - range.0)
}

fn sample_int(rng: &mut impl Rng, range: (usize, usize)) -> usize {
    rng.random_range(range.0..=range.1)
}

fn sample_kind(rng: &mut impl Rng, kind: &StrategyKind) -> StrategyKind {
    match kind {
        StrategyKind::KMeans { .. } => StrategyKind::KMeans {
            k: sample_int(rng, K_RANGE),
        },
        StrategyKind::Dbscan { .. } => StrategyKind::Dbscan {
            eps: sample_float(rng, EPS_RANGE),
            min_samples: sample_int(rng, MIN_SAMPLES_RANGE),
        },
        StrategyKind::RffKernelKMeans { n_features, .. } => StrategyKind::RffKernelKMeans {
            k: sample_int(rng, K_RANGE),
            gamma: sample_float(rng, GAMMA_RANGE),
            n_features: *n_features,
        },
    }
}

fn score_config(config: &ExperimentConfig, metric: &str) -> Result<Option<f64>> {
    let mut values = Vec::with_capacity(config.run.repetitions);
    for rep in 0..config.run.repetitions {
        let output = execute_repetition(config, rep)?;
        let value = match metric {
            "ari" => output.row.ari,
            "silhouette" => output.row.silhouette,
            other => bail!("unknown hpo metric {other:?}"),
        };
        match value {
            Some(v) => values.push(v),
            // A degenerate run (e.g. silhouette over one cluster) sinks
            // the trial instead of crashing the search.
            None => return Ok(None),
        }
    }
    Ok(Some(values.iter().sum::<f64>() / values.len() as f64))
}

/// Runs the random search and returns the winning configuration.
pub fn cmd_hpo(config: &ExperimentConfig, trials_override: Option<usize>) -> Result<HpoOutcome> {
    let spec: HpoSpec = config.hpo.clone().unwrap_or_default();
    let trials = trials_override.unwrap_or(spec.trials);
    if trials == 0 {
        bail!("hpo needs at least one trial");
    }
    let tuned: Vec<usize> = {
        let marked: Vec<usize> = config
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.tune)
            .map(|(i, _)| i)
            .collect();
        if marked.is_empty() {
            (0..config.agents.len()).collect()
        } else {
            marked
        }
    };

    let mut rng = rng_from(mix_seed(config.run.master_seed, 0x48504f));
    let mut records = Vec::with_capacity(trials);
    let mut best: Option<(usize, f64, ExperimentConfig)> = None;
    for trial in 0..trials {
        let mut candidate = config.clone();
        let mut sampled = Vec::new();
        for &a in &tuned {
            let agent = &mut candidate.agents[a];
            agent.strategy.kind = sample_kind(&mut rng, &agent.strategy.kind);
            if spec.tune_step {
                agent.repetitions = sample_int(&mut rng, REPS_RANGE);
                agent.feature_fraction = sample_float(&mut rng, Q_RANGE);
            }
            sampled.push((
                a,
                agent.strategy.kind.clone(),
                agent.repetitions,
                agent.feature_fraction,
            ));
        }
        let score = score_config(&candidate, &spec.metric)
            .with_context(|| format!("hpo trial {trial}"))?;
        if let Some(s) = score {
            let better = match &best {
                Some((_, best_score, _)) => s > *best_score,
                None => true,
            };
            if better {
                best = Some((trial, s, candidate));
            }
        }
        records.push(TrialRecord {
            trial,
            score,
            sampled,
        });
    }
    let (best_trial, best_score, best_config) =
        best.context("every hpo trial failed to produce the target metric")?;
    Ok(HpoOutcome {
        best_trial,
        best_score,
        metric: spec.metric,
        trials: records,
        best_config: Some(best_config),
    })
}
