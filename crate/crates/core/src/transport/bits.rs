//! Information-bit accounting per round, audited against the closed-form
//! communication bound.
//!
//! These counters measure encodable information, not framing: each label
//! costs `ceil(log2 C_a)` bits and each transmitted identifier costs
//! `ceil(log2 n)` bits, with the log argument clamped to 2 so that a single
//! cluster still pays one bit per label.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{MessagePhase, Payload, ProtocolMessage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccountingError {
    #[error("round {round} transcript incomplete: agent {agent} sent {got} messages for {phase:?}, expected 1")]
    Incomplete {
        round: u32,
        agent: u16,
        phase: MessagePhase,
        got: usize,
    },
    #[error("round {round} transcript inconsistent: {detail}")]
    Inconsistent { round: u32, detail: String },
}

/// The run parameters a round's bound is evaluated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitReportParams {
    pub agents: usize,
    pub n: usize,
    /// Active medoids entering the round.
    pub n_prev: usize,
    /// Consensus clusters formed in the round.
    pub n_cur: usize,
    /// Largest per-agent local cluster count.
    pub c_max: usize,
    /// Candidate list cap in force for the round.
    pub n_s: usize,
}

/// Per-round information-bit totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitReport {
    pub round: u32,
    pub label_bits: u64,
    pub medlist_bits: u64,
    pub params: BitReportParams,
}

impl BitReport {
    pub fn total_bits(&self) -> u64 {
        self.label_bits + self.medlist_bits
    }

    /// The closed-form bound evaluated at this round's parameters.
    pub fn bound(&self) -> u64 {
        proposition1_bound(
            self.params.agents,
            self.params.n,
            self.params.n_prev,
            self.params.n_cur,
            self.params.c_max,
            self.params.n_s,
        )
    }

    pub fn within_bound(&self) -> bool {
        self.total_bits() <= self.bound()
    }
}

/// `ceil(log2(max(x, 2)))`.
fn ceil_log2_clamped(x: usize) -> u64 {
    let x = x.max(2) as u64;
    u64::BITS as u64 - (x - 1).leading_zeros() as u64
}

/// The per-round communication bound
/// `A(A-1) * [ n_prev * ceil(log2 c_max) + n_cur * n_s * ceil(log2 n) ]`,
/// with both log arguments clamped to at least 2.
pub fn proposition1_bound(
    agents: usize,
    n: usize,
    n_prev: usize,
    n_cur: usize,
    c_max: usize,
    n_s: usize,
) -> u64 {
    if agents <= 1 {
        return 0;
    }
    let pairs = agents as u64 * (agents as u64 - 1);
    let label_term = n_prev as u64 * ceil_log2_clamped(c_max);
    let medoid_term = n_cur as u64 * n_s as u64 * ceil_log2_clamped(n);
    pairs * (label_term + medoid_term)
}

/// Tallies the information bits of one complete round.
///
/// `messages` must hold exactly one labels message and one medoid-list
/// message per agent for the round (none at all for a single-agent run).
/// `n` is the global sample count; `n_s_cfg` the configured candidate cap,
/// reported as the round's largest cluster size when unset.
pub fn account_bits(
    round: u32,
    messages: &[&ProtocolMessage],
    agents: usize,
    n: usize,
    n_s_cfg: Option<usize>,
) -> Result<BitReport, AccountingError> {
    if agents <= 1 {
        return Ok(BitReport {
            round,
            label_bits: 0,
            medlist_bits: 0,
            params: BitReportParams {
                agents,
                n,
                n_prev: 0,
                n_cur: 0,
                c_max: 0,
                n_s: 0,
            },
        });
    }
    let peers = (agents - 1) as u64;
    let mut label_bits = 0u64;
    let mut medlist_bits = 0u64;
    let mut n_prev: Option<usize> = None;
    let mut n_cur: Option<usize> = None;
    let mut c_max = 0usize;
    let mut max_cluster = 0usize;

    for agent in 0..agents as u16 {
        for phase in [MessagePhase::Labels, MessagePhase::MedLists] {
            let mine: Vec<&&ProtocolMessage> = messages
                .iter()
                .filter(|m| m.round == round && m.sender == agent && m.phase == phase)
                .collect();
            if mine.len() != 1 {
                return Err(AccountingError::Incomplete {
                    round,
                    agent,
                    phase,
                    got: mine.len(),
                });
            }
            match &mine[0].payload {
                Payload::Labels(labels) => {
                    let prev = *n_prev.get_or_insert(labels.len());
                    if prev != labels.len() {
                        return Err(AccountingError::Inconsistent {
                            round,
                            detail: format!(
                                "label vector lengths differ ({} vs {})",
                                prev,
                                labels.len()
                            ),
                        });
                    }
                    let c_a = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(1);
                    c_max = c_max.max(c_a);
                    label_bits += peers * labels.len() as u64 * ceil_log2_clamped(c_a);
                }
                Payload::MedLists(lists) => {
                    let cur = *n_cur.get_or_insert(lists.len());
                    if cur != lists.len() {
                        return Err(AccountingError::Inconsistent {
                            round,
                            detail: format!(
                                "cluster counts differ ({} vs {})",
                                cur,
                                lists.len()
                            ),
                        });
                    }
                    let ids: usize = lists.iter().map(|l| l.candidates.len()).sum();
                    max_cluster =
                        max_cluster.max(lists.iter().map(|l| l.candidates.len()).max().unwrap_or(0));
                    medlist_bits += peers * ids as u64 * ceil_log2_clamped(n);
                }
            }
        }
    }
    Ok(BitReport {
        round,
        label_bits,
        medlist_bits,
        params: BitReportParams {
            agents,
            n,
            n_prev: n_prev.unwrap_or(0),
            n_cur: n_cur.unwrap_or(0),
            c_max,
            n_s: n_s_cfg.unwrap_or(max_cluster),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::RankedList;
    use crate::model::{ClusterCode, SampleId};

    #[test]
    fn bound_matches_direct_evaluation() {
        // 2 * 1 * [8 * 1 + 3 * 3 * 3] = 70
        assert_eq!(proposition1_bound(2, 8, 8, 3, 2, 3), 70);
        assert_eq!(proposition1_bound(1, 100, 100, 10, 5, 3), 0);
        // log2 arguments clamp to 2: one cluster still costs a bit per label.
        assert_eq!(proposition1_bound(2, 2, 4, 0, 1, 0), 2 * 4);
    }

    fn labels_msg(sender: u16, labels: Vec<u32>) -> ProtocolMessage {
        ProtocolMessage::labels(sender, 1, labels)
    }

    fn lists_msg(sender: u16, sizes: &[usize]) -> ProtocolMessage {
        let lists = sizes
            .iter()
            .enumerate()
            .map(|(i, &len)| RankedList {
                cluster_key: ClusterCode(vec![i as u32, 0]),
                candidates: (0..len as u32).map(SampleId).collect(),
            })
            .collect();
        ProtocolMessage::med_lists(sender, 1, lists)
    }

    #[test]
    fn two_binary_agents_cost_sixteen_label_bits() {
        // A=2, n_prev=8, C_a=2 for both agents: 2 * 1 * 8 * 1 = 16.
        let msgs = [
            labels_msg(0, vec![0, 1, 0, 1, 0, 1, 0, 1]),
            labels_msg(1, vec![1, 1, 1, 1, 0, 0, 0, 0]),
            lists_msg(0, &[2, 2]),
            lists_msg(1, &[2, 2]),
        ];
        let refs: Vec<&ProtocolMessage> = msgs.iter().collect();
        let report = account_bits(1, &refs, 2, 8, Some(2)).unwrap();
        assert_eq!(report.label_bits, 16);
        // 4 ids per agent, ceil(log2 8) = 3 bits each, one peer.
        assert_eq!(report.medlist_bits, 2 * 4 * 3);
        assert!(report.within_bound());
    }

    #[test]
    fn single_agent_rounds_cost_nothing() {
        let report = account_bits(1, &[], 1, 50, None).unwrap();
        assert_eq!(report.total_bits(), 0);
        assert_eq!(report.bound(), 0);
        assert!(report.within_bound());
    }

    #[test]
    fn missing_messages_are_an_accounting_error() {
        let msgs = [labels_msg(0, vec![0, 1])];
        let refs: Vec<&ProtocolMessage> = msgs.iter().collect();
        let err = account_bits(1, &refs, 2, 2, None).unwrap_err();
        assert!(matches!(err, AccountingError::Incomplete { .. }));
    }
}
