//! Byzantine behavior injection.
//!
//! Attacks are purely message-level: an adversarial agent emits well-formed
//! protocol messages and never observes honest peers. Ranking attacks
//! permute a locally computed candidate list; label attacks replace the
//! broadcast label vector outright.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::consensus::RankedList;
use crate::rng::{mix_seed, rng_from};

/// How a ranking attacker permutes its candidate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankAttackStrategy {
    /// Invert the order entirely.
    Reverse,
    /// Move the locally worst candidate to the top.
    PromoteWorst,
    /// Seeded uniform shuffle.
    RandomShuffle,
}

/// How a label attacker fabricates its broadcast labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelAttackStrategy {
    /// A single shared label: the attempt to force merges.
    AllSame,
    /// All-distinct labels: the attempt to veto every merge.
    AllDistinct,
    /// Seeded uniform labels over `classes` values.
    RandomLabels { classes: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ByzantineBehavior {
    HonestPassthrough,
    RankPermute {
        strategy: RankAttackStrategy,
        seed: u64,
    },
    LabelAttack {
        strategy: LabelAttackStrategy,
        seed: u64,
    },
}

impl ByzantineBehavior {
    pub fn is_honest(&self) -> bool {
        matches!(self, ByzantineBehavior::HonestPassthrough)
    }

    pub fn attacks_labels(&self) -> bool {
        matches!(self, ByzantineBehavior::LabelAttack { .. })
    }

    pub fn attacks_ranks(&self) -> bool {
        matches!(self, ByzantineBehavior::RankPermute { .. })
    }
}

/// Stable fold of a cluster code, used to vary shuffle streams per cluster.
fn fold_code(components: &[u32]) -> u64 {
    components
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |acc, &c| {
            (acc ^ c as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

/// Permutes a ranked list according to a `RankPermute` behavior. The
/// candidate multiset and the cluster key are preserved, so the message
/// stays well-formed.
///
/// # Panics
/// If the behavior is not `RankPermute`.
pub fn apply_rank_attack(list: &RankedList, behavior: &ByzantineBehavior) -> RankedList {
    let ByzantineBehavior::RankPermute { strategy, seed } = behavior else {
        panic!("apply_rank_attack requires a RankPermute behavior");
    };
    let mut candidates = list.candidates.clone();
    match strategy {
        RankAttackStrategy::Reverse => candidates.reverse(),
        RankAttackStrategy::PromoteWorst => {
            if let Some(last) = candidates.pop() {
                candidates.insert(0, last);
            }
        }
        RankAttackStrategy::RandomShuffle => {
            let mut rng = rng_from(mix_seed(*seed, fold_code(list.cluster_key.components())));
            candidates.shuffle(&mut rng);
        }
    }
    RankedList {
        cluster_key: list.cluster_key.clone(),
        candidates,
    }
}

/// Fabricates an adversarial label vector over `n_active` samples.
///
/// # Panics
/// If the behavior is not `LabelAttack`.
pub fn apply_label_attack(n_active: usize, behavior: &ByzantineBehavior) -> Vec<u32> {
    let ByzantineBehavior::LabelAttack { strategy, seed } = behavior else {
        panic!("apply_label_attack requires a LabelAttack behavior");
    };
    match strategy {
        LabelAttackStrategy::AllSame => vec![0; n_active],
        LabelAttackStrategy::AllDistinct => (0..n_active as u32).collect(),
        LabelAttackStrategy::RandomLabels { classes } => {
            use rand::Rng;
            let classes = (*classes).max(1);
            let mut rng = rng_from(*seed);
            (0..n_active).map(|_| rng.random_range(0..classes)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClusterCode, SampleId};

    fn list(ids: &[u32]) -> RankedList {
        RankedList {
            cluster_key: ClusterCode(vec![0, 1]),
            candidates: ids.iter().copied().map(SampleId).collect(),
        }
    }

    #[test]
    fn reverse_inverts_the_order() {
        let behavior = ByzantineBehavior::RankPermute {
            strategy: RankAttackStrategy::Reverse,
            seed: 0,
        };
        let out = apply_rank_attack(&list(&[5, 9, 12]), &behavior);
        assert_eq!(out.candidates, vec![SampleId(12), SampleId(9), SampleId(5)]);
        assert_eq!(out.cluster_key, ClusterCode(vec![0, 1]));
    }

    #[test]
    fn promote_worst_moves_the_last_candidate_first() {
        let behavior = ByzantineBehavior::RankPermute {
            strategy: RankAttackStrategy::PromoteWorst,
            seed: 0,
        };
        let out = apply_rank_attack(&list(&[1, 2, 3]), &behavior);
        assert_eq!(out.candidates, vec![SampleId(3), SampleId(1), SampleId(2)]);
    }

    #[test]
    fn random_shuffle_is_a_frozen_seeded_permutation() {
        let behavior = ByzantineBehavior::RankPermute {
            strategy: RankAttackStrategy::RandomShuffle,
            seed: 1234,
        };
        let input = list(&[10, 20, 30, 40, 50]);
        let a = apply_rank_attack(&input, &behavior);
        let b = apply_rank_attack(&input, &behavior);
        assert_eq!(a, b, "same seed, same permutation");
        let mut sorted = a.candidates.clone();
        sorted.sort();
        assert_eq!(sorted, input.candidates, "candidate multiset preserved");
    }

    #[test]
    fn label_attacks_produce_the_documented_vectors() {
        let same = ByzantineBehavior::LabelAttack {
            strategy: LabelAttackStrategy::AllSame,
            seed: 0,
        };
        assert_eq!(apply_label_attack(4, &same), vec![0, 0, 0, 0]);
        let distinct = ByzantineBehavior::LabelAttack {
            strategy: LabelAttackStrategy::AllDistinct,
            seed: 0,
        };
        assert_eq!(apply_label_attack(4, &distinct), vec![0, 1, 2, 3]);
        let random = ByzantineBehavior::LabelAttack {
            strategy: LabelAttackStrategy::RandomLabels { classes: 3 },
            seed: 9,
        };
        let labels = apply_label_attack(50, &random);
        assert_eq!(labels, apply_label_attack(50, &random));
        assert!(labels.iter().all(|&l| l < 3));
    }
}
