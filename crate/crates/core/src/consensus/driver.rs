//! The protocol driver: runs a set of agents over a transport to
//! completion, checks cross-agent agreement, and assembles the transcript
//! and per-round bit reports.
//!
//! Sequential mode steps every agent once per pass in id order; concurrent
//! mode gives each agent its own thread and relies on blocking collects as
//! round barriers. Both produce identical results and byte-identical
//! canonical transcripts because message collection is ordered by sender id.

use super::agent::{AgentState, RoundTrace};
use super::ConsensusError;
use crate::model::CfhTree;
use crate::transport::{account_bits, merge_transcript, BitReport, Endpoint, ProtocolMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Sequential,
    Concurrent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_labels: Vec<u32>,
    pub cfh: CfhTree,
    pub rounds: u32,
    pub trace: Vec<RoundTrace>,
    pub bit_reports: Vec<BitReport>,
    /// Canonical transcript, ordered by `(round, phase, sender)`.
    pub transcript: Vec<ProtocolMessage>,
}

impl RunResult {
    /// Total information bits per round.
    pub fn bits_per_round(&self) -> Vec<u64> {
        self.bit_reports.iter().map(|r| r.total_bits()).collect()
    }
}

/// Drives all agents to completion. `agents[i]` communicates through
/// `endpoints[i]`; both must be in agent-id order.
pub fn run_protocol(
    mut agents: Vec<AgentState>,
    endpoints: Vec<Box<dyn Endpoint>>,
    mode: ExecutionMode,
    n_s: Option<usize>,
) -> Result<RunResult, ConsensusError> {
    assert_eq!(agents.len(), endpoints.len(), "one endpoint per agent");
    assert!(!agents.is_empty(), "need at least one agent");
    for (agent, ep) in agents.iter().zip(endpoints.iter()) {
        assert_eq!(agent.agent_id(), ep.agent_id(), "endpoint order mismatch");
    }
    let n = agents[0].sample_count();

    match mode {
        ExecutionMode::Sequential => run_sequential(&mut agents, &endpoints)?,
        ExecutionMode::Concurrent => run_concurrent(&mut agents, &endpoints)?,
    }

    check_agreement(&agents)?;

    let reference = agents[0].outcome().expect("all agents are done").clone();
    let transcript = merge_transcript(&endpoints);
    let mut bit_reports = Vec::with_capacity(reference.rounds as usize);
    for round in 1..=reference.rounds {
        let round_msgs: Vec<&ProtocolMessage> =
            transcript.iter().filter(|m| m.round == round).collect();
        bit_reports.push(account_bits(round, &round_msgs, agents.len(), n, n_s)?);
    }

    Ok(RunResult {
        final_labels: reference.final_labels,
        cfh: reference.cfh,
        rounds: reference.rounds,
        trace: agents[0].trace().to_vec(),
        bit_reports,
        transcript,
    })
}

fn run_sequential(
    agents: &mut [AgentState],
    endpoints: &[Box<dyn Endpoint>],
) -> Result<(), ConsensusError> {
    while agents.iter().any(|a| !a.is_done()) {
        // Agents advance in lockstep; a phase mismatch means the protocol
        // state diverged.
        let phase = agents[0].phase();
        if agents.iter().any(|a| a.phase() != phase) {
            return Err(ConsensusError::Desync(
                "agents are in different phases".into(),
            ));
        }
        for (agent, endpoint) in agents.iter_mut().zip(endpoints.iter()) {
            agent.step(endpoint.as_ref())?;
        }
    }
    Ok(())
}

fn run_concurrent(
    agents: &mut [AgentState],
    endpoints: &[Box<dyn Endpoint>],
) -> Result<(), ConsensusError> {
    let results: Vec<Result<(), ConsensusError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = agents
            .iter_mut()
            .zip(endpoints.iter())
            .map(|(agent, endpoint)| {
                scope.spawn(move || {
                    while !agent.is_done() {
                        agent.step(endpoint.as_ref())?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join() {
                Ok(r) => r,
                Err(_) => Err(ConsensusError::Desync("agent thread panicked".into())),
            })
            .collect()
    });
    for r in results {
        r?;
    }
    Ok(())
}

/// Every honest agent must end with identical labels, hierarchy, and
/// per-round trace. Byzantine agents in this harness aggregate the same
/// broadcast set, so they are held to the same check.
fn check_agreement(agents: &[AgentState]) -> Result<(), ConsensusError> {
    let first = agents[0].outcome().ok_or_else(|| {
        ConsensusError::Agreement("agent 0 finished without an outcome".into())
    })?;
    for agent in &agents[1..] {
        let outcome = agent.outcome().ok_or_else(|| {
            ConsensusError::Agreement(format!("agent {} has no outcome", agent.agent_id()))
        })?;
        if outcome.final_labels != first.final_labels {
            return Err(ConsensusError::Agreement("final labels".into()));
        }
        if outcome.cfh != first.cfh {
            return Err(ConsensusError::Agreement("fusion hierarchies".into()));
        }
        if outcome.rounds != first.rounds {
            return Err(ConsensusError::Agreement("round counts".into()));
        }
        if agent.trace() != agents[0].trace() {
            return Err(ConsensusError::Agreement("round traces".into()));
        }
    }
    Ok(())
}
