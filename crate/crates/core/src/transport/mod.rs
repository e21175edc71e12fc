//! Protocol messages, broadcast/collect transports, the wire codec, and
//! information-bit accounting.
//!
//! Both transports are peer-to-peer: every broadcast reaches every other
//! agent exactly once and `collect` blocks until all peers' messages for a
//! `(round, phase)` slot have arrived, returned in ascending sender order so
//! the protocol is scheduling-independent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::RankedList;
use crate::model::AgentId;

pub mod bits;
pub mod codec;
pub mod sim;
pub mod tcp;

pub use bits::{account_bits, proposition1_bound, BitReport, BitReportParams};
pub use codec::{decode_message, encode_message, DecodeError, DecodeErrorKind, EncodeError};
pub use sim::SimNetwork;
pub use tcp::{TcpEndpoint, TcpPeerTable};

/// Which of the two per-iteration exchanges a message belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessagePhase {
    Labels,
    MedLists,
}

impl MessagePhase {
    pub fn wire_tag(self) -> u8 {
        match self {
            MessagePhase::Labels => 0,
            MessagePhase::MedLists => 1,
        }
    }
}

/// Everything an agent ever sends: its labels over the active set, or its
/// ranked medoid candidate lists. Payloads hold only identifiers, labels,
/// and codes; no feature-derived numerical value has a representation here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Labels(Vec<u32>),
    MedLists(Vec<RankedList>),
}

impl Payload {
    pub fn phase(&self) -> MessagePhase {
        match self {
            Payload::Labels(_) => MessagePhase::Labels,
            Payload::MedLists(_) => MessagePhase::MedLists,
        }
    }
}

/// One broadcast message. `(sender, round, phase)` is unique per run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub sender: AgentId,
    pub round: u32,
    pub phase: MessagePhase,
    pub payload: Payload,
}

impl ProtocolMessage {
    pub fn labels(sender: AgentId, round: u32, labels: Vec<u32>) -> Self {
        ProtocolMessage {
            sender,
            round,
            phase: MessagePhase::Labels,
            payload: Payload::Labels(labels),
        }
    }

    pub fn med_lists(sender: AgentId, round: u32, lists: Vec<RankedList>) -> Self {
        ProtocolMessage {
            sender,
            round,
            phase: MessagePhase::MedLists,
            payload: Payload::MedLists(lists),
        }
    }

    /// Canonical transcript key.
    pub fn slot(&self) -> (u32, u8, AgentId) {
        (self.round, self.phase.wire_tag(), self.sender)
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("duplicate message for round {round} phase {phase:?} from agent {sender}")]
    DuplicateMessage {
        sender: AgentId,
        round: u32,
        phase: MessagePhase,
    },
    #[error("payload phase does not match the declared message phase")]
    PhaseMismatch,
    #[error("timed out waiting for round {round} phase {phase:?}; missing senders {missing:?}")]
    Timeout {
        round: u32,
        phase: MessagePhase,
        missing: Vec<AgentId>,
    },
    #[error("peer {peer} unreachable: {detail}")]
    PeerUnreachable { peer: AgentId, detail: String },
    #[error("connection setup failed: {0}")]
    Setup(String),
    #[error("i/o failure talking to peer {peer}: {detail}")]
    PeerIo { peer: AgentId, detail: String },
    #[error("wire decode failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("wire encode failed: {0}")]
    Encode(#[from] EncodeError),
}

/// One agent's handle onto the network.
///
/// An endpoint is owned by exactly one agent context but must be shareable
/// with the driver thread, hence `Sync`.
pub trait Endpoint: Send + Sync {
    fn agent_id(&self) -> AgentId;

    /// Total number of agents, including this one.
    fn agent_count(&self) -> usize;

    /// Delivers `msg` to every other agent exactly once.
    fn broadcast(&self, msg: ProtocolMessage) -> Result<(), TransportError>;

    /// Blocks until all `A - 1` peer messages for `(round, phase)` have
    /// arrived; returns them in ascending sender order.
    fn collect(
        &self,
        round: u32,
        phase: MessagePhase,
    ) -> Result<Vec<ProtocolMessage>, TransportError>;

    /// Everything this endpoint has broadcast, in send order. Used to
    /// assemble run transcripts.
    fn sent(&self) -> Vec<ProtocolMessage>;
}

/// Merges per-endpoint send logs into the canonical transcript, ordered by
/// `(round, phase, sender)`. Identical for sequential and concurrent
/// executions of the same run.
pub fn merge_transcript(endpoints: &[Box<dyn Endpoint>]) -> Vec<ProtocolMessage> {
    let mut all: Vec<ProtocolMessage> = endpoints.iter().flat_map(|e| e.sent()).collect();
    all.sort_by_key(|m| m.slot());
    all
}
