//! Builds datasets and agents from a config and executes protocol runs.
//!
//! Seed derivation is centralized here: repetition `r` of a run with master
//! seed `m` uses `rep_seed = mix(m, r)`, and every dataset, agent context,
//! strategy, and behavior seed derives from `rep_seed` through fixed stream
//! tags. Two invocations of the same config are therefore bit-identical.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use vertcohirf::cluster::{ClusteringStrategy, LocalStepConfig};
use vertcohirf::consensus::{run_protocol, AgentState, ExecutionMode, ProtocolConfig, RunResult};
use vertcohirf::datagen::{gen_blobs, gen_multimodal, load_csv, BlobsConfig, LabeledDataset};
use vertcohirf::metrics::{ari, silhouette, MetricsError};
use vertcohirf::rng::{mix_seed, mix_seed2};
use vertcohirf::transport::{Endpoint, SimNetwork};

use crate::config::{
    AgentSpec, DatasetSpec, ExperimentConfig, RunMode, TransportMode, TransportSpec,
};

// Stream tags for per-repetition seed derivation.
const TAG_DATASET: u64 = 1;
const TAG_CONTEXT: u64 = 2;
const TAG_STRATEGY: u64 = 3;
const TAG_BEHAVIOR: u64 = 4;

/// Everything recorded about one repetition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRow {
    pub rep: usize,
    /// The repetition seed; replaying with this as master seed and one
    /// repetition reproduces the run.
    pub seed: u64,
    pub ari: Option<f64>,
    pub silhouette: Option<f64>,
    pub rounds: u32,
    pub final_clusters: usize,
    pub bits_per_round: Vec<u64>,
    pub bounds_per_round: Vec<u64>,
}

pub struct RepetitionOutput {
    pub row: RunRow,
    pub result: RunResult,
}

pub fn rep_seed(master_seed: u64, rep: usize) -> u64 {
    mix_seed(master_seed, rep as u64)
}

/// Materializes the dataset for one repetition. Generators draw fresh data
/// per repetition; CSV data is fixed.
pub fn build_dataset(spec: &DatasetSpec, rep_seed: u64) -> Result<LabeledDataset> {
    match spec {
        DatasetSpec::Multimodal { n, seed } => {
            gen_multimodal(*n, mix_seed2(rep_seed, TAG_DATASET, *seed))
                .map_err(|e| anyhow!("multimodal generator: {e}"))
        }
        // A single informative block; callers that want per-agent blocks
        // use build_blobs instead.
        spec @ DatasetSpec::Blobs { .. } => Ok(build_blobs(spec, 1, rep_seed)?.0),
        DatasetSpec::Csv {
            path,
            label_column,
            categorical,
        } => load_csv(path, label_column.as_deref(), categorical)
            .with_context(|| format!("loading {}", path.display())),
    }
}

/// Blob datasets shape their informative blocks around the agent count, so
/// they get a dedicated constructor returning the disjoint partition.
pub fn build_blobs(
    spec: &DatasetSpec,
    agents: usize,
    rep_seed: u64,
) -> Result<(LabeledDataset, vertcohirf::datagen::FeaturePartition)> {
    let DatasetSpec::Blobs {
        n,
        clusters,
        sigma,
        noise_features,
        center_distance,
        seed,
    } = spec
    else {
        bail!("build_blobs called with a non-blob dataset");
    };
    gen_blobs(&BlobsConfig {
        n: *n,
        c: *clusters,
        sigma: *sigma,
        n_noise_features: *noise_features,
        agents,
        center_distance: *center_distance,
        seed: mix_seed2(rep_seed, TAG_DATASET, *seed),
    })
    .map_err(|e| anyhow!("blob generator: {e}"))
}

/// The feature view of each agent: explicit sets from the config, the blob
/// partition for blob data, or the full feature range.
pub fn resolve_feature_sets(
    config: &ExperimentConfig,
    dataset: &LabeledDataset,
    blob_partition: Option<&vertcohirf::datagen::FeaturePartition>,
) -> Result<Vec<Vec<usize>>> {
    let p = dataset.p();
    config
        .agents
        .iter()
        .enumerate()
        .map(|(i, agent)| {
            let set = match (&agent.features, blob_partition) {
                (Some(explicit), _) => explicit.clone(),
                (None, Some(partition)) => partition.sets[i].clone(),
                (None, None) => (0..p).collect(),
            };
            for &f in &set {
                if f >= p {
                    bail!("agent {i} references feature {f}, dataset has {p}");
                }
            }
            Ok(set)
        })
        .collect()
}

pub fn build_agents(
    specs: &[AgentSpec],
    dataset: &LabeledDataset,
    feature_sets: &[Vec<usize>],
    rep_seed: u64,
    protocol: ProtocolConfig,
) -> Result<Vec<AgentState>> {
    specs
        .iter()
        .enumerate()
        .map(|(a, spec)| {
            let behavior = spec.parse_behavior(mix_seed2(rep_seed, TAG_BEHAVIOR, a as u64))?;
            Ok(AgentState::new(
                a as u16,
                dataset.view(&feature_sets[a]),
                ClusteringStrategy {
                    kind: spec.strategy.kind.clone(),
                    seed: mix_seed2(rep_seed, TAG_STRATEGY, a as u64),
                },
                LocalStepConfig {
                    repetitions: spec.repetitions,
                    feature_fraction: spec.feature_fraction,
                    relaxed: spec.relaxed,
                    relax_threshold: spec.relax_threshold,
                },
                behavior,
                mix_seed2(rep_seed, TAG_CONTEXT, a as u64),
                protocol,
            ))
        })
        .collect()
}

fn build_endpoints(transport: &TransportSpec, agents: usize) -> Result<Vec<Box<dyn Endpoint>>> {
    let timeout = std::time::Duration::from_secs(transport.timeout_secs);
    match transport.mode {
        TransportMode::Sim => Ok(SimNetwork::with_timeout(agents, timeout).endpoints()),
        TransportMode::Tcp => {
            let endpoints = if transport.peers.is_empty() {
                vertcohirf::transport::tcp::local_mesh(agents, timeout)?
            } else {
                tcp_mesh_from_table(transport, timeout)?
            };
            Ok(endpoints
                .into_iter()
                .map(|e| Box::new(e) as Box<dyn Endpoint>)
                .collect())
        }
    }
}

/// Binds every agent of the table in this process and fully connects them.
/// `VERTCOHIRF_BIND` overrides the bind host (the port stays the table's).
fn tcp_mesh_from_table(
    transport: &TransportSpec,
    timeout: std::time::Duration,
) -> Result<Vec<vertcohirf::transport::TcpEndpoint>> {
    use vertcohirf::transport::{TcpEndpoint, TcpPeerTable};
    let bind_host = std::env::var("VERTCOHIRF_BIND").ok();
    let mut peers = Vec::new();
    for (agent, addr) in &transport.peers {
        let addr: std::net::SocketAddr = addr
            .parse()
            .with_context(|| format!("bad peer address {addr:?}"))?;
        peers.push((*agent, addr));
    }
    peers.sort_by_key(|(agent, _)| *agent);
    let table = TcpPeerTable { peers };
    let bound: Vec<_> = table
        .peers
        .iter()
        .map(|(agent, addr)| {
            let bind_addr = match &bind_host {
                Some(host) => format!("{host}:{}", addr.port()),
                None => addr.to_string(),
            };
            TcpEndpoint::bind(*agent, &bind_addr)
        })
        .collect::<Result<_, _>>()?;
    let handles: Vec<_> = bound
        .into_iter()
        .map(|b| {
            let table = table.clone();
            std::thread::spawn(move || b.connect(&table, timeout))
        })
        .collect();
    let mut endpoints = Vec::new();
    for h in handles {
        endpoints.push(
            h.join()
                .map_err(|_| anyhow!("tcp connect thread panicked"))??,
        );
    }
    Ok(endpoints)
}

/// Runs one repetition end to end and computes the requested metrics.
pub fn execute_repetition(config: &ExperimentConfig, rep: usize) -> Result<RepetitionOutput> {
    let seed = rep_seed(config.run.master_seed, rep);
    let (dataset, blob_partition) = match &config.dataset {
        spec @ DatasetSpec::Blobs { .. } => {
            let (ds, partition) = build_blobs(spec, config.agents.len(), seed)?;
            (ds, Some(partition))
        }
        spec => (build_dataset(spec, seed)?, None),
    };
    let feature_sets = resolve_feature_sets(config, &dataset, blob_partition.as_ref())?;
    execute_on_dataset(config, &dataset, &feature_sets, rep)
}

/// Runs one repetition on an already materialized dataset and feature
/// assignment (the sweeps drive this directly).
pub fn execute_on_dataset(
    config: &ExperimentConfig,
    dataset: &LabeledDataset,
    feature_sets: &[Vec<usize>],
    rep: usize,
) -> Result<RepetitionOutput> {
    let seed = rep_seed(config.run.master_seed, rep);
    let protocol = ProtocolConfig {
        max_iter: config.run.max_iter,
        n_s: config.n_s(),
    };
    let agents = build_agents(&config.agents, dataset, feature_sets, seed, protocol)?;
    let endpoints = build_endpoints(&config.transport, agents.len())?;
    let mode = match config.run.mode {
        RunMode::Sequential => ExecutionMode::Sequential,
        RunMode::Concurrent => ExecutionMode::Concurrent,
    };
    let result = run_protocol(agents, endpoints, mode, protocol.n_s)?;

    let ari_score = if config.wants_metric("ari") {
        match &dataset.labels {
            Some(truth) => Some(ari(truth, &result.final_labels)?.value),
            None => bail!("config requests ARI but the dataset has no labels"),
        }
    } else {
        None
    };
    // Evaluation-only: the harness sees the concatenated features, agents
    // never do.
    let sil_score = if config.wants_metric("silhouette") {
        match silhouette(dataset.features.view(), &result.final_labels) {
            Ok(s) => Some(s.value),
            Err(MetricsError::SingleCluster) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let final_clusters = result.cfh.roots.len();
    let row = RunRow {
        rep,
        seed,
        ari: ari_score,
        silhouette: sil_score,
        rounds: result.rounds,
        final_clusters,
        bits_per_round: result.bits_per_round(),
        bounds_per_round: result.bit_reports.iter().map(|r| r.bound()).collect(),
    };
    Ok(RepetitionOutput { row, result })
}
