//! Shared domain types: sample identifiers, the active medoid set, label
//! vectors, cluster codes, and the parent-pointer map that accumulates
//! cluster fusions across iterations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cfh;

pub use cfh::{CfhNode, CfhTree};

/// Index of an agent within a run. Agents are numbered `0..A`.
pub type AgentId = u16;

/// Globally shared sample identifier in `[0, n)`.
///
/// Identifiers are identical at every agent and stable across iterations;
/// all cross-agent communication refers to samples through these ids.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct SampleId(pub u32);

impl SampleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for SampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("active set ids must be strictly ascending (violation at position {position})")]
    UnsortedActiveSet { position: usize },
    #[error("consensus cluster {cluster} selected {count} medoids from the new active set, expected exactly 1")]
    MedoidCountViolation { cluster: u32, count: usize },
    #[error("id {id} from the new active set is not part of the previous active set")]
    UnknownMedoid { id: SampleId },
    #[error("consensus labels have length {got}, active set has {expected} members")]
    LabelLengthMismatch { got: usize, expected: usize },
    #[error("parent pointer chain from {id} does not terminate (cycle)")]
    ParentCycle { id: SampleId },
    #[error("parent chain from {id} ends at {root} which is not a declared root")]
    DanglingRoot { id: SampleId, root: SampleId },
    #[error("fusion log is inconsistent with the parent map at {child}")]
    InconsistentFusionLog { child: SampleId },
}

/// The ordered set of active medoid identifiers at one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSet {
    ids: Vec<SampleId>,
    iteration: u32,
}

impl ActiveSet {
    /// The full sample range `[0, n)` at iteration 0.
    pub fn initial(n: usize) -> Self {
        ActiveSet {
            ids: (0..n as u32).map(SampleId).collect(),
            iteration: 0,
        }
    }

    /// Builds an active set, enforcing strictly ascending unique ids.
    pub fn new(ids: Vec<SampleId>, iteration: u32) -> Result<Self, ModelError> {
        for (pos, pair) in ids.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(ModelError::UnsortedActiveSet { position: pos + 1 });
            }
        }
        Ok(ActiveSet { ids, iteration })
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: SampleId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// Position of `id` inside the set, if active.
    pub fn position(&self, id: SampleId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Row indices of the active samples within the full `n x p` matrix.
    pub fn row_indices(&self) -> Vec<usize> {
        self.ids.iter().map(|id| id.index()).collect()
    }
}

/// One agent's dense cluster labels over the current active set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub agent: AgentId,
    /// One label per active sample, aligned with the active set order.
    pub labels: Vec<u32>,
}

impl LabelVector {
    pub fn new(agent: AgentId, labels: Vec<u32>) -> Self {
        LabelVector { agent, labels }
    }

    /// Number of distinct labels; assumes dense labels in `[0, C)`.
    pub fn cluster_count(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }
}

/// The joint structural code of one sample: one label component per agent,
/// in agent-index order. Two samples belong to the same consensus cluster
/// iff their codes are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterCode(pub Vec<u32>);

impl ClusterCode {
    pub fn components(&self) -> &[u32] {
        &self.0
    }
}

/// A fusion recorded when a non-selected sample was attached to its
/// cluster's chosen medoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionEvent {
    pub child: SampleId,
    pub parent: SampleId,
    pub iteration: u32,
}

/// Parent pointers over all `n` samples.
///
/// Active medoids point to themselves. Once a sample is fused its pointer is
/// permanent: later iterations only ever rewrite pointers of currently
/// active ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParentMap {
    parent: Vec<SampleId>,
}

impl ParentMap {
    /// Identity map: every sample is its own (active) root.
    pub fn identity(n: usize) -> Self {
        ParentMap {
            parent: (0..n as u32).map(SampleId).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn get(&self, id: SampleId) -> SampleId {
        self.parent[id.index()]
    }

    pub fn is_root(&self, id: SampleId) -> bool {
        self.get(id) == id
    }

    /// Follows pointers from `id` to its fixed point.
    pub fn root_of(&self, id: SampleId) -> Result<SampleId, ModelError> {
        let mut cur = id;
        // A chain longer than n must revisit a node.
        for _ in 0..=self.parent.len() {
            let next = self.get(cur);
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
        Err(ModelError::ParentCycle { id })
    }

    /// Attaches every non-selected member of `k_prev` to the unique member
    /// of `k_new` inside its consensus cluster.
    ///
    /// `consensus` holds dense cluster labels aligned with `k_prev`. Each
    /// consensus cluster must contain exactly one `k_new` medoid; anything
    /// else is a protocol-invariant violation. Returns the fusions applied,
    /// tagged with `iteration`.
    pub fn update_parents(
        &mut self,
        consensus: &[u32],
        k_prev: &ActiveSet,
        k_new: &ActiveSet,
        iteration: u32,
    ) -> Result<Vec<FusionEvent>, ModelError> {
        if consensus.len() != k_prev.len() {
            return Err(ModelError::LabelLengthMismatch {
                got: consensus.len(),
                expected: k_prev.len(),
            });
        }
        let clusters = consensus.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut medoid_of = vec![None; clusters];
        for &id in k_new.ids() {
            let pos = k_prev
                .position(id)
                .ok_or(ModelError::UnknownMedoid { id })?;
            let cluster = consensus[pos] as usize;
            if let Some(prev) = medoid_of[cluster] {
                let _: SampleId = prev;
                return Err(ModelError::MedoidCountViolation {
                    cluster: cluster as u32,
                    count: 2,
                });
            }
            medoid_of[cluster] = Some(id);
        }
        for (cluster, medoid) in medoid_of.iter().enumerate() {
            if medoid.is_none() {
                return Err(ModelError::MedoidCountViolation {
                    cluster: cluster as u32,
                    count: 0,
                });
            }
        }

        let mut events = Vec::new();
        for (pos, &id) in k_prev.ids().iter().enumerate() {
            let medoid = medoid_of[consensus[pos] as usize].expect("checked above");
            if id != medoid {
                self.parent[id.index()] = medoid;
                events.push(FusionEvent {
                    child: id,
                    parent: medoid,
                    iteration,
                });
            }
        }
        Ok(events)
    }

    /// Labels every sample by the dense index of its transitive root
    /// within `roots`.
    pub fn final_labels(&self, roots: &ActiveSet) -> Result<Vec<u32>, ModelError> {
        let mut labels = Vec::with_capacity(self.parent.len());
        for raw in 0..self.parent.len() as u32 {
            let id = SampleId(raw);
            let root = self.root_of(id)?;
            let label = roots
                .position(root)
                .ok_or(ModelError::DanglingRoot { id, root })?;
            labels.push(label as u32);
        }
        Ok(labels)
    }

    /// The fixed points of the map, ascending.
    pub fn roots(&self) -> Vec<SampleId> {
        self.parent
            .iter()
            .enumerate()
            .filter(|(i, p)| p.index() == *i)
            .map(|(i, _)| SampleId(i as u32))
            .collect()
    }
}
