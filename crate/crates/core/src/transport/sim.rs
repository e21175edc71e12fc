//! Deterministic in-process transport.
//!
//! A shared hub stores every broadcast keyed by `(round, phase, sender)`;
//! `collect` blocks on a condition variable until all peer messages for the
//! slot are present. Delivery is lossless and the returned order is always
//! ascending by sender, so concurrent and sequential executions observe
//! identical histories.

use std::collections::BTreeMap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use super::{Endpoint, MessagePhase, ProtocolMessage, TransportError};
use crate::model::AgentId;

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

struct HubState {
    messages: BTreeMap<(u32, u8, AgentId), ProtocolMessage>,
}

struct Hub {
    agents: usize,
    timeout: Duration,
    state: Mutex<HubState>,
    arrived: Condvar,
}

/// The simulated network; hand one [`SimNetwork::endpoint`] to each agent.
#[derive(Clone)]
pub struct SimNetwork {
    hub: Arc<Hub>,
}

impl SimNetwork {
    pub fn new(agents: usize) -> Self {
        Self::with_timeout(agents, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(agents: usize, timeout: Duration) -> Self {
        SimNetwork {
            hub: Arc::new(Hub {
                agents,
                timeout,
                state: Mutex::new(HubState {
                    messages: BTreeMap::new(),
                }),
                arrived: Condvar::new(),
            }),
        }
    }

    pub fn endpoint(&self, agent_id: AgentId) -> SimEndpoint {
        assert!((agent_id as usize) < self.hub.agents, "unknown agent id");
        SimEndpoint {
            hub: Arc::clone(&self.hub),
            agent_id,
        }
    }

    /// Boxed endpoints for all agents, in id order.
    pub fn endpoints(&self) -> Vec<Box<dyn Endpoint>> {
        (0..self.hub.agents as AgentId)
            .map(|id| Box::new(self.endpoint(id)) as Box<dyn Endpoint>)
            .collect()
    }

    /// Every message broadcast so far, in canonical
    /// `(round, phase, sender)` order.
    pub fn transcript(&self) -> Vec<ProtocolMessage> {
        let state = self.hub.state.lock().expect("hub poisoned");
        state.messages.values().cloned().collect()
    }
}

pub struct SimEndpoint {
    hub: Arc<Hub>,
    agent_id: AgentId,
}

impl Endpoint for SimEndpoint {
    fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    fn agent_count(&self) -> usize {
        self.hub.agents
    }

    fn broadcast(&self, msg: ProtocolMessage) -> Result<(), TransportError> {
        if msg.payload.phase() != msg.phase {
            return Err(TransportError::PhaseMismatch);
        }
        let key = msg.slot();
        let mut state = self.hub.state.lock().expect("hub poisoned");
        if state.messages.contains_key(&key) {
            return Err(TransportError::DuplicateMessage {
                sender: msg.sender,
                round: msg.round,
                phase: msg.phase,
            });
        }
        state.messages.insert(key, msg);
        drop(state);
        self.hub.arrived.notify_all();
        Ok(())
    }

    fn collect(
        &self,
        round: u32,
        phase: MessagePhase,
    ) -> Result<Vec<ProtocolMessage>, TransportError> {
        let expected: Vec<AgentId> = (0..self.hub.agents as AgentId)
            .filter(|&a| a != self.agent_id)
            .collect();
        let deadline = std::time::Instant::now() + self.hub.timeout;
        let mut state = self.hub.state.lock().expect("hub poisoned");
        loop {
            let missing: Vec<AgentId> = expected
                .iter()
                .copied()
                .filter(|&a| !state.messages.contains_key(&(round, phase.wire_tag(), a)))
                .collect();
            if missing.is_empty() {
                return Ok(expected
                    .iter()
                    .map(|&a| state.messages[&(round, phase.wire_tag(), a)].clone())
                    .collect());
            }
            let now = std::time::Instant::now();
            if now >= deadline {
                return Err(TransportError::Timeout {
                    round,
                    phase,
                    missing,
                });
            }
            let (next, _) = self
                .hub
                .arrived
                .wait_timeout(state, deadline - now)
                .expect("hub poisoned");
            state = next;
        }
    }

    fn sent(&self) -> Vec<ProtocolMessage> {
        let state = self.hub.state.lock().expect("hub poisoned");
        state
            .messages
            .values()
            .filter(|m| m.sender == self.agent_id)
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn one_broadcast_reaches_the_single_peer() {
        let net = SimNetwork::new(2);
        let a = net.endpoint(0);
        let b = net.endpoint(1);
        a.broadcast(ProtocolMessage::labels(0, 1, vec![0, 1])).unwrap();
        let got = b.collect(1, MessagePhase::Labels).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].sender, 0);
    }

    #[test]
    fn fan_out_excludes_the_sender() {
        let net = SimNetwork::new(4);
        for id in 0..4u16 {
            net.endpoint(id)
                .broadcast(ProtocolMessage::labels(id, 1, vec![id as u32]))
                .unwrap();
        }
        for id in 0..4u16 {
            let got = net.endpoint(id).collect(1, MessagePhase::Labels).unwrap();
            let senders: Vec<u16> = got.iter().map(|m| m.sender).collect();
            let expected: Vec<u16> = (0..4).filter(|&a| a != id).collect();
            assert_eq!(senders, expected, "ascending sender order, self excluded");
        }
    }

    #[test]
    fn duplicate_slots_are_rejected() {
        let net = SimNetwork::new(2);
        let a = net.endpoint(0);
        a.broadcast(ProtocolMessage::labels(0, 1, vec![0])).unwrap();
        let err = a
            .broadcast(ProtocolMessage::labels(0, 1, vec![1]))
            .unwrap_err();
        assert!(matches!(err, TransportError::DuplicateMessage { .. }));
    }

    #[test]
    fn collect_of_out_of_order_arrivals_returns_sorted() {
        let net = SimNetwork::new(3);
        net.endpoint(2)
            .broadcast(ProtocolMessage::labels(2, 1, vec![2]))
            .unwrap();
        net.endpoint(1)
            .broadcast(ProtocolMessage::labels(1, 1, vec![1]))
            .unwrap();
        let got = net.endpoint(0).collect(1, MessagePhase::Labels).unwrap();
        assert_eq!(got[0].sender, 1);
        assert_eq!(got[1].sender, 2);
    }

    #[test]
    fn collect_times_out_naming_missing_senders() {
        let net = SimNetwork::with_timeout(3, Duration::from_millis(20));
        net.endpoint(1)
            .broadcast(ProtocolMessage::labels(1, 1, vec![1]))
            .unwrap();
        let err = net.endpoint(0).collect(1, MessagePhase::Labels).unwrap_err();
        match err {
            TransportError::Timeout { missing, .. } => assert_eq!(missing, vec![2]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn collect_unblocks_once_peers_arrive() {
        let net = SimNetwork::new(2);
        let waiter = net.endpoint(1);
        let handle = std::thread::spawn(move || waiter.collect(1, MessagePhase::Labels));
        std::thread::sleep(Duration::from_millis(10));
        net.endpoint(0)
            .broadcast(ProtocolMessage::labels(0, 1, vec![7]))
            .unwrap();
        let got = handle.join().unwrap().unwrap();
        assert_eq!(got[0].payload, super::super::Payload::Labels(vec![7]));
    }
}
