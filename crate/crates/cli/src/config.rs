//! Experiment configuration: a single TOML file describing the dataset,
//! the agents, the transport, and the run parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vertcohirf::adversary::{ByzantineBehavior, LabelAttackStrategy, RankAttackStrategy};
use vertcohirf::cluster::StrategyKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// Two noisy concentric spheres plus three square vertices, six joint
    /// classes.
    Multimodal {
        #[serde(default = "default_multimodal_n")]
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Isotropic Gaussian blobs with per-agent informative blocks.
    Blobs {
        #[serde(default = "default_blobs_n")]
        n: usize,
        #[serde(default = "default_blobs_clusters")]
        clusters: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        noise_features: usize,
        #[serde(default = "default_center_distance")]
        center_distance: f64,
        #[serde(default)]
        seed: u64,
    },
    /// External data; numeric CSV with a header row.
    Csv {
        path: PathBuf,
        #[serde(default)]
        label_column: Option<String>,
        #[serde(default)]
        categorical: Vec<String>,
    },
}

fn default_multimodal_n() -> usize {
    1200
}
fn default_blobs_n() -> usize {
    1000
}
fn default_blobs_clusters() -> usize {
    4
}
fn default_sigma() -> f64 {
    0.25
}
fn default_center_distance() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    /// Explicit feature indices; all features when omitted.
    #[serde(default)]
    pub features: Option<Vec<usize>>,
    pub strategy: StrategyTomlSpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_feature_fraction")]
    pub feature_fraction: f64,
    #[serde(default)]
    pub relaxed: bool,
    #[serde(default = "default_relax_threshold")]
    pub relax_threshold: f64,
    /// One of: honest, rank_reverse, rank_promote_worst, rank_shuffle,
    /// label_all_same, label_all_distinct, label_random:<classes>.
    #[serde(default = "default_behavior")]
    pub behavior: String,
    /// Whether cmd_hpo samples this agent's hyperparameters.
    #[serde(default)]
    pub tune: bool,
}

fn default_repetitions() -> usize {
    1
}
fn default_feature_fraction() -> f64 {
    1.0
}
fn default_relax_threshold() -> f64 {
    0.8
}
fn default_behavior() -> String {
    "honest".to_string()
}

/// Strategy as written in TOML; the seed is filled in by the runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyTomlSpec {
    #[serde(flatten)]
    pub kind: StrategyKind,
}

impl AgentSpec {
    pub fn parse_behavior(&self, seed: u64) -> Result<ByzantineBehavior, ConfigError> {
        let text = self.behavior.trim();
        Ok(match text {
            "honest" => ByzantineBehavior::HonestPassthrough,
            "rank_reverse" => ByzantineBehavior::RankPermute {
                strategy: RankAttackStrategy::Reverse,
                seed,
            },
            "rank_promote_worst" => ByzantineBehavior::RankPermute {
                strategy: RankAttackStrategy::PromoteWorst,
                seed,
            },
            "rank_shuffle" => ByzantineBehavior::RankPermute {
                strategy: RankAttackStrategy::RandomShuffle,
                seed,
            },
            "label_all_same" => ByzantineBehavior::LabelAttack {
                strategy: LabelAttackStrategy::AllSame,
                seed,
            },
            "label_all_distinct" => ByzantineBehavior::LabelAttack {
                strategy: LabelAttackStrategy::AllDistinct,
                seed,
            },
            other => {
                if let Some(classes) = other.strip_prefix("label_random:") {
                    let classes: u32 = classes.parse().map_err(|_| {
                        ConfigError::Invalid(format!("bad class count in behavior {other:?}"))
                    })?;
                    ByzantineBehavior::LabelAttack {
                        strategy: LabelAttackStrategy::RandomLabels { classes },
                        seed,
                    }
                } else {
                    return Err(ConfigError::Invalid(format!("unknown behavior {other:?}")));
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    Sim,
    Tcp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    #[serde(default = "default_transport_mode")]
    pub mode: TransportMode,
    /// Static peer table for TCP: `[[agent, "host:port"], ...]`. An empty
    /// table uses ephemeral localhost ports.
    #[serde(default)]
    pub peers: Vec<(u16, String)>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_transport_mode() -> TransportMode {
    TransportMode::Sim
}
fn default_timeout_secs() -> u64 {
    30
}

impl Default for TransportSpec {
    fn default() -> Self {
        TransportSpec {
            mode: TransportMode::Sim,
            peers: Vec::new(),
            timeout_secs: default_timeout_secs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Sequential,
    Concurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_run_repetitions")]
    pub repetitions: usize,
    /// Candidate cap per ranked list; 0 means full clusters.
    #[serde(default)]
    pub n_s: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: u32,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_run_mode")]
    pub mode: RunMode,
    #[serde(default)]
    pub dump_dataset: bool,
}

fn default_run_repetitions() -> usize {
    1
}
fn default_max_iter() -> u32 {
    100
}
fn default_metrics() -> Vec<String> {
    vec!["ari".to_string()]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_run_mode() -> RunMode {
    RunMode::Sequential
}

impl Default for RunSpec {
    fn default() -> Self {
        toml::from_str("").expect("empty run spec has defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoSpec {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_hpo_metric")]
    pub metric: String,
    /// Also sample repetitions and feature fraction for tuned agents.
    #[serde(default)]
    pub tune_step: bool,
}

fn default_trials() -> usize {
    50
}
fn default_hpo_metric() -> String {
    "ari".to_string()
}

impl Default for HpoSpec {
    fn default() -> Self {
        HpoSpec {
            trials: default_trials(),
            metric: default_hpo_metric(),
            tune_step: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(rename = "agent")]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub transport: TransportSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub hpo: Option<HpoSpec>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.agents.is_empty() {
            return Err(ConfigError::Invalid("need at least one agent".into()));
        }
        if self.run.repetitions == 0 {
            return Err(ConfigError::Invalid("need at least one repetition".into()));
        }
        if self.run.max_iter == 0 {
            return Err(ConfigError::Invalid("max_iter must be >= 1".into()));
        }
        for (i, agent) in self.agents.iter().enumerate() {
            let strategy = vertcohirf::cluster::ClusteringStrategy {
                kind: agent.strategy.kind.clone(),
                seed: 0,
            };
            strategy
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("agent {i}: {e}")))?;
            let step = vertcohirf::cluster::LocalStepConfig {
                repetitions: agent.repetitions,
                feature_fraction: agent.feature_fraction,
                relaxed: agent.relaxed,
                relax_threshold: agent.relax_threshold,
            };
            step.validate()
                .map_err(|e| ConfigError::Invalid(format!("agent {i}: {e}")))?;
            agent.parse_behavior(0)?;
            if let Some(features) = &agent.features {
                if features.is_empty() {
                    return Err(ConfigError::Invalid(format!(
                        "agent {i} has an empty feature list"
                    )));
                }
            }
        }
        if let DatasetSpec::Csv { path, .. } = &self.dataset {
            if !path.exists() {
                return Err(ConfigError::Invalid(format!(
                    "csv dataset {} does not exist",
                    path.display()
                )));
            }
        }
        if self.transport.mode == TransportMode::Tcp && !self.transport.peers.is_empty() {
            if self.transport.peers.len() != self.agents.len() {
                return Err(ConfigError::Invalid(
                    "peer table size must match the agent count".into(),
                ));
            }
        }
        for metric in &self.run.metrics {
            if metric != "ari" && metric != "silhouette" {
                return Err(ConfigError::Invalid(format!("unknown metric {metric:?}")));
            }
        }
        if let Some(hpo) = &self.hpo {
            if hpo.metric != "ari" && hpo.metric != "silhouette" {
                return Err(ConfigError::Invalid(format!(
                    "unknown hpo metric {:?}",
                    hpo.metric
                )));
            }
        }
        Ok(())
    }

    /// Candidate cap as an option; 0 in the file means "full cluster".
    pub fn n_s(&self) -> Option<usize> {
        if self.run.n_s == 0 {
            None
        } else {
            Some(self.run.n_s)
        }
    }

    pub fn wants_metric(&self, name: &str) -> bool {
        self.run.metrics.iter().any(|m| m == name)
    }

    /// Output directory, honoring the `VERTCOHIRF_OUT` override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("VERTCOHIRF_OUT") {
            Some(dir) => PathBuf::from(dir),
            None => self.run.output_dir.clone(),
        }
    }
}
