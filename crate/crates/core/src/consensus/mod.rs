//! The consensus protocol: code concatenation, strict cross-agent cluster
//! formation, local medoid ranking, and score aggregation.
//!
//! Two samples share a consensus cluster iff every agent gave them the same
//! local label that round. Agreement is a veto, not a vote: one dissenting
//! agent blocks a merge regardless of the others.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ActiveSet, ClusterCode, LabelVector, ModelError, SampleId};
use crate::transport::TransportError;

pub mod agent;
pub mod driver;

pub use agent::{AgentOutcome, AgentPhase, AgentState, ProtocolConfig, RoundTrace};
pub use driver::{run_protocol, ExecutionMode, RunResult};

#[derive(Debug, Error)]
pub enum ConsensusError {
    #[error("protocol desync: {0}")]
    Desync(String),
    #[error("no medoid candidates for a consensus cluster")]
    EmptyCandidates,
    #[error("transport failure at iteration {round}: {source}")]
    Transport {
        round: u32,
        #[source]
        source: TransportError,
    },
    #[error("protocol invariant violated at iteration {round}: {source}")]
    Invariant {
        round: u32,
        #[source]
        source: ModelError,
    },
    #[error("agents disagree on {0} at the end of the run")]
    Agreement(String),
    #[error("bit accounting failed: {0}")]
    Accounting(#[from] crate::transport::bits::AccountingError),
}

/// One agent's ordered medoid candidates for one consensus cluster, best
/// first, truncated to the candidate cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList {
    pub cluster_key: ClusterCode,
    pub candidates: Vec<SampleId>,
}

/// Aggregated rank score of one candidate; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedoidScore {
    pub candidate: SampleId,
    pub score: u64,
}

/// Concatenates per-agent label vectors into per-sample codes, one
/// component per agent in agent-index order.
pub fn concat_codes(vectors: &[LabelVector]) -> Result<Vec<ClusterCode>, ConsensusError> {
    let Some(first) = vectors.first() else {
        return Err(ConsensusError::Desync("no label vectors to concatenate".into()));
    };
    let n = first.labels.len();
    for pair in vectors.windows(2) {
        if pair[0].agent >= pair[1].agent {
            return Err(ConsensusError::Desync(format!(
                "label vectors out of agent order ({} then {})",
                pair[0].agent, pair[1].agent
            )));
        }
    }
    for v in vectors {
        if v.labels.len() != n {
            return Err(ConsensusError::Desync(format!(
                "agent {} sent {} labels, agent {} sent {}",
                first.agent,
                n,
                v.agent,
                v.labels.len()
            )));
        }
    }
    let mut codes = vec![ClusterCode(Vec::with_capacity(vectors.len())); n];
    for v in vectors {
        for (code, &label) in codes.iter_mut().zip(v.labels.iter()) {
            code.0.push(label);
        }
    }
    Ok(codes)
}

/// The consensus partition induced by code equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusClusters {
    /// Dense consensus labels aligned with the code list.
    pub labels: Vec<u32>,
    /// Member positions per cluster, in first-occurrence cluster order.
    pub members: Vec<Vec<usize>>,
    /// The shared code of each cluster, same order as `members`.
    pub keys: Vec<ClusterCode>,
}

/// Groups samples by exact code equality. Clusters are numbered by first
/// occurrence, so every agent derives the identical partition from the same
/// broadcast set.
pub fn codes_to_clusters(codes: &[ClusterCode]) -> ConsensusClusters {
    let mut index: std::collections::HashMap<&ClusterCode, u32> = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(codes.len());
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<ClusterCode> = Vec::new();
    for (pos, code) in codes.iter().enumerate() {
        let label = *index.entry(code).or_insert_with(|| {
            members.push(Vec::new());
            keys.push(code.clone());
            members.len() as u32 - 1
        });
        labels.push(label);
        members[label as usize].push(pos);
    }
    ConsensusClusters {
        labels,
        members,
        keys,
    }
}

/// Ranks a cluster's members by the local medoid objective: ascending total
/// Euclidean distance to every other member, ties broken towards the
/// smaller sample id. Truncated to the best `n_s`.
///
/// `x_active` rows are aligned with `active`; `members` holds positions
/// into both.
pub fn rank_candidates_local(
    x_active: ArrayView2<f64>,
    members: &[usize],
    active: &ActiveSet,
    cluster_key: ClusterCode,
    n_s: usize,
) -> RankedList {
    debug_assert!(!members.is_empty(), "consensus clusters are never empty");
    debug_assert!(n_s >= 1);
    let mut scored: Vec<(f64, SampleId)> = members
        .iter()
        .map(|&m| {
            let total: f64 = members
                .iter()
                .map(|&j| {
                    x_active
                        .row(m)
                        .iter()
                        .zip(x_active.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum();
            (total, active.ids()[m])
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    scored.truncate(n_s);
    RankedList {
        cluster_key,
        candidates: scored.into_iter().map(|(_, id)| id).collect(),
    }
}

/// Scores every candidate appearing in at least one list: the sum over
/// agents of the candidate's 1-based position, charging `n_s + 1` when an
/// agent did not list it.
pub fn medoid_scores(lists: &[&RankedList], n_s: usize) -> Result<Vec<MedoidScore>, ConsensusError> {
    let Some(first) = lists.first() else {
        return Err(ConsensusError::EmptyCandidates);
    };
    for l in lists {
        if l.cluster_key != first.cluster_key {
            return Err(ConsensusError::Desync(
                "ranked lists for different clusters aggregated together".into(),
            ));
        }
    }
    let mut order: Vec<SampleId> = Vec::new();
    let mut seen: std::collections::HashSet<SampleId> = std::collections::HashSet::new();
    for l in lists {
        for &c in &l.candidates {
            if seen.insert(c) {
                order.push(c);
            }
        }
    }
    if order.is_empty() {
        return Err(ConsensusError::EmptyCandidates);
    }
    let absent = (n_s + 1) as u64;
    Ok(order
        .into_iter()
        .map(|candidate| {
            let score = lists
                .iter()
                .map(|l| {
                    l.candidates
                        .iter()
                        .position(|&c| c == candidate)
                        .map(|p| p as u64 + 1)
                        .unwrap_or(absent)
                })
                .sum();
            MedoidScore { candidate, score }
        })
        .collect())
}

/// The cluster's chosen medoid: minimum aggregated score, ties broken
/// towards the smallest sample id.
pub fn aggregate_medoid_scores(
    lists: &[&RankedList],
    n_s: usize,
) -> Result<SampleId, ConsensusError> {
    let scores = medoid_scores(lists, n_s)?;
    Ok(scores
        .into_iter()
        .min_by(|a, b| a.score.cmp(&b.score).then(a.candidate.cmp(&b.candidate)))
        .expect("scores checked non-empty")
        .candidate)
}
