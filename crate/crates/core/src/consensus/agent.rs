//! The per-agent protocol state machine.
//!
//! Each iteration walks the phases LocalCluster -> AwaitLabels ->
//! RankMedoids -> AwaitMedLists -> Advance, then loops or finishes. All
//! cross-agent inputs are collected in ascending sender order, so every
//! honest agent derives the identical consensus partition, medoids, and
//! hierarchy from the same broadcast set.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{
    aggregate_medoid_scores, codes_to_clusters, concat_codes, ConsensusError, RankedList,
};
use crate::adversary::{apply_label_attack, apply_rank_attack, ByzantineBehavior};
use crate::cluster::{get_clusters, ClusteringStrategy, LocalStepConfig};
use crate::model::{ActiveSet, AgentId, CfhTree, ClusterCode, FusionEvent, LabelVector, ParentMap, SampleId};
use crate::rng::mix_seed;
use crate::transport::{Endpoint, MessagePhase, Payload, ProtocolMessage};

/// Driver-level settings shared by all agents of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub max_iter: u32,
    /// Cap on ranked candidates per cluster; `None` sends full clusters.
    pub n_s: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            max_iter: 100,
            n_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentPhase {
    LocalCluster,
    AwaitLabels,
    RankMedoids,
    AwaitMedLists,
    Advance,
    Done,
}

/// What one agent observed in one iteration; identical across honest agents
/// and the audit ground truth for the robustness properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub iteration: u32,
    pub active: Vec<SampleId>,
    /// Broadcast labels per agent, agent-index order.
    pub agent_labels: Vec<Vec<u32>>,
    pub consensus: Vec<u32>,
    /// Chosen medoid per consensus cluster, cluster order.
    pub chosen: Vec<SampleId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentOutcome {
    pub final_labels: Vec<u32>,
    pub cfh: CfhTree,
    pub rounds: u32,
}

pub struct AgentState {
    agent_id: AgentId,
    features: Array2<f64>,
    strategy: ClusteringStrategy,
    step_cfg: LocalStepConfig,
    behavior: ByzantineBehavior,
    /// Context seed; the driver derives it from the master seed and the
    /// agent index.
    seed: u64,
    cfg: ProtocolConfig,

    active: ActiveSet,
    parents: ParentMap,
    fusion_log: Vec<FusionEvent>,
    phase: AgentPhase,
    round: u32,

    // Per-round scratch.
    x_view: Option<Array2<f64>>,
    my_labels: Option<Vec<u32>>,
    agent_labels: Option<Vec<Vec<u32>>>,
    consensus_labels: Option<Vec<u32>>,
    members: Option<Vec<Vec<usize>>>,
    cluster_keys: Option<Vec<ClusterCode>>,
    my_lists: Option<Vec<RankedList>>,
    pending_chosen: Option<Vec<SampleId>>,

    trace: Vec<RoundTrace>,
    outcome: Option<AgentOutcome>,
}

impl AgentState {
    pub fn new(
        agent_id: AgentId,
        features: Array2<f64>,
        strategy: ClusteringStrategy,
        step_cfg: LocalStepConfig,
        behavior: ByzantineBehavior,
        seed: u64,
        cfg: ProtocolConfig,
    ) -> Self {
        let n = features.nrows();
        AgentState {
            agent_id,
            features,
            strategy,
            step_cfg,
            behavior,
            seed,
            cfg,
            active: ActiveSet::initial(n),
            parents: ParentMap::identity(n),
            fusion_log: Vec::new(),
            phase: AgentPhase::LocalCluster,
            round: 1,
            x_view: None,
            my_labels: None,
            agent_labels: None,
            consensus_labels: None,
            members: None,
            cluster_keys: None,
            my_lists: None,
            pending_chosen: None,
            trace: Vec::new(),
            outcome: None,
        }
    }

    pub fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    pub fn phase(&self) -> AgentPhase {
        self.phase
    }

    pub fn is_done(&self) -> bool {
        self.phase == AgentPhase::Done
    }

    pub fn is_honest(&self) -> bool {
        self.behavior.is_honest()
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn trace(&self) -> &[RoundTrace] {
        &self.trace
    }

    pub fn outcome(&self) -> Option<&AgentOutcome> {
        self.outcome.as_ref()
    }

    pub fn sample_count(&self) -> usize {
        self.features.nrows()
    }

    fn effective_ns(&self, cluster_size: usize) -> usize {
        self.cfg.n_s.unwrap_or(cluster_size).max(1)
    }

    /// Advances one phase. A no-op once done.
    pub fn step(&mut self, endpoint: &dyn Endpoint) -> Result<(), ConsensusError> {
        match self.phase {
            AgentPhase::LocalCluster => self.local_cluster(endpoint),
            AgentPhase::AwaitLabels => self.await_labels(endpoint),
            AgentPhase::RankMedoids => self.rank_medoids(endpoint),
            AgentPhase::AwaitMedLists => self.await_med_lists(endpoint),
            AgentPhase::Advance => self.advance(),
            AgentPhase::Done => Ok(()),
        }
    }

    fn local_cluster(&mut self, endpoint: &dyn Endpoint) -> Result<(), ConsensusError> {
        let rows = self.active.row_indices();
        let x_view = self.features.select(Axis(0), &rows);
        let labels = if self.behavior.attacks_labels() {
            apply_label_attack(self.active.len(), &self.behavior)
        } else {
            get_clusters(
                x_view.view(),
                &self.strategy,
                &self.step_cfg,
                mix_seed(self.seed, self.round as u64),
            )
        };
        endpoint
            .broadcast(ProtocolMessage::labels(
                self.agent_id,
                self.round,
                labels.clone(),
            ))
            .map_err(|source| ConsensusError::Transport {
                round: self.round,
                source,
            })?;
        self.x_view = Some(x_view);
        self.my_labels = Some(labels);
        self.phase = AgentPhase::AwaitLabels;
        Ok(())
    }

    fn await_labels(&mut self, endpoint: &dyn Endpoint) -> Result<(), ConsensusError> {
        let received = endpoint
            .collect(self.round, MessagePhase::Labels)
            .map_err(|source| ConsensusError::Transport {
                round: self.round,
                source,
            })?;
        let mut vectors: Vec<LabelVector> = Vec::with_capacity(received.len() + 1);
        for msg in received {
            let Payload::Labels(labels) = msg.payload else {
                return Err(ConsensusError::Desync(format!(
                    "agent {} sent a non-label payload in the label phase",
                    msg.sender
                )));
            };
            vectors.push(LabelVector::new(msg.sender, labels));
        }
        vectors.push(LabelVector::new(
            self.agent_id,
            self.my_labels.take().expect("set in LocalCluster"),
        ));
        vectors.sort_by_key(|v| v.agent);
        let codes = concat_codes(&vectors)?;
        let clusters = codes_to_clusters(&codes);
        self.agent_labels = Some(vectors.into_iter().map(|v| v.labels).collect());
        self.consensus_labels = Some(clusters.labels);
        self.members = Some(clusters.members);
        self.cluster_keys = Some(clusters.keys);
        self.phase = AgentPhase::RankMedoids;
        Ok(())
    }

    fn rank_medoids(&mut self, endpoint: &dyn Endpoint) -> Result<(), ConsensusError> {
        let x_view = self.x_view.as_ref().expect("set in LocalCluster");
        let members = self.members.as_ref().expect("set in AwaitLabels");
        let keys = self.cluster_keys.as_ref().expect("set in AwaitLabels");
        let mut lists = Vec::with_capacity(members.len());
        for (cluster, key) in members.iter().zip(keys.iter()) {
            let list = super::rank_candidates_local(
                x_view.view(),
                cluster,
                &self.active,
                key.clone(),
                self.effective_ns(cluster.len()),
            );
            let list = if self.behavior.attacks_ranks() {
                apply_rank_attack(&list, &self.behavior)
            } else {
                list
            };
            lists.push(list);
        }
        endpoint
            .broadcast(ProtocolMessage::med_lists(
                self.agent_id,
                self.round,
                lists.clone(),
            ))
            .map_err(|source| ConsensusError::Transport {
                round: self.round,
                source,
            })?;
        self.my_lists = Some(lists);
        self.phase = AgentPhase::AwaitMedLists;
        Ok(())
    }

    fn await_med_lists(&mut self, endpoint: &dyn Endpoint) -> Result<(), ConsensusError> {
        let received = endpoint
            .collect(self.round, MessagePhase::MedLists)
            .map_err(|source| ConsensusError::Transport {
                round: self.round,
                source,
            })?;
        let members = self.members.take().expect("set in AwaitLabels");
        let keys = self.cluster_keys.take().expect("set in AwaitLabels");
        let my_lists = self.my_lists.take().expect("set in RankMedoids");

        let mut per_agent: Vec<(AgentId, Vec<RankedList>)> = Vec::with_capacity(received.len() + 1);
        for msg in received {
            let Payload::MedLists(lists) = msg.payload else {
                return Err(ConsensusError::Desync(format!(
                    "agent {} sent a non-list payload in the medoid phase",
                    msg.sender
                )));
            };
            per_agent.push((msg.sender, lists));
        }
        per_agent.push((self.agent_id, my_lists));
        per_agent.sort_by_key(|(agent, _)| *agent);

        let mut chosen: Vec<SampleId> = Vec::with_capacity(members.len());
        for (ci, key) in keys.iter().enumerate() {
            let mut lists: Vec<&RankedList> = Vec::with_capacity(per_agent.len());
            for (agent, agent_lists) in &per_agent {
                let list = agent_lists.get(ci).ok_or_else(|| {
                    ConsensusError::Desync(format!(
                        "agent {agent} sent {} medoid lists, expected {}",
                        agent_lists.len(),
                        keys.len()
                    ))
                })?;
                if list.cluster_key != *key {
                    return Err(ConsensusError::Desync(format!(
                        "agent {agent} ranked a different cluster at position {ci}"
                    )));
                }
                lists.push(list);
            }
            chosen.push(aggregate_medoid_scores(
                &lists,
                self.effective_ns(members[ci].len()),
            )?);
        }
        self.members = Some(members);
        self.cluster_keys = Some(keys);
        self.pending_chosen = Some(chosen);
        self.phase = AgentPhase::Advance;
        Ok(())
    }

    fn advance(&mut self) -> Result<(), ConsensusError> {
        let chosen = self.pending_chosen.take().expect("set in AwaitMedLists");
        let consensus = self.consensus_labels.take().expect("set in AwaitLabels");
        let agent_labels = self.agent_labels.take().expect("set in AwaitLabels");

        let mut new_ids = chosen.clone();
        new_ids.sort_unstable();
        let k_new = ActiveSet::new(new_ids, self.round).map_err(|source| {
            ConsensusError::Invariant {
                round: self.round,
                source,
            }
        })?;
        let events = self
            .parents
            .update_parents(&consensus, &self.active, &k_new, self.round)
            .map_err(|source| ConsensusError::Invariant {
                round: self.round,
                source,
            })?;
        self.fusion_log.extend(events);
        self.trace.push(RoundTrace {
            iteration: self.round,
            active: self.active.ids().to_vec(),
            agent_labels,
            consensus,
            chosen,
        });

        let stable = k_new.ids() == self.active.ids();
        self.x_view = None;
        self.members = None;
        self.cluster_keys = None;
        if stable || self.round >= self.cfg.max_iter {
            let final_labels =
                self.parents
                    .final_labels(&k_new)
                    .map_err(|source| ConsensusError::Invariant {
                        round: self.round,
                        source,
                    })?;
            let cfh = CfhTree::build(&self.parents, &self.fusion_log).map_err(|source| {
                ConsensusError::Invariant {
                    round: self.round,
                    source,
                }
            })?;
            self.outcome = Some(AgentOutcome {
                final_labels,
                cfh,
                rounds: self.round,
            });
            self.active = k_new;
            self.phase = AgentPhase::Done;
        } else {
            self.active = k_new;
            self.round += 1;
            self.phase = AgentPhase::LocalCluster;
        }
        Ok(())
    }
}
