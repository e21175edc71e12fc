//! Length-prefixed TCP transport.
//!
//! Each agent binds a listener and dials every peer from a static peer
//! table, keeping one outbound connection per peer for sending. Inbound
//! connections feed reader threads that decode frames into a shared inbox;
//! frames identify their sender, so no handshake is needed. A frame is a
//! `u32` little-endian byte length followed by one encoded message.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use super::codec::{decode_message, encode_message};
use super::{Endpoint, MessagePhase, ProtocolMessage, TransportError};
use crate::model::AgentId;

const DIAL_RETRY: Duration = Duration::from_millis(25);

/// Static peer table: one `(agent id, address)` row per agent, this agent
/// included.
#[derive(Debug, Clone)]
pub struct TcpPeerTable {
    pub peers: Vec<(AgentId, SocketAddr)>,
}

impl TcpPeerTable {
    pub fn agent_count(&self) -> usize {
        self.peers.len()
    }
}

struct Inbox {
    messages: BTreeMap<(u32, u8, AgentId), ProtocolMessage>,
    /// First hard failure observed by a reader thread.
    broken: Option<String>,
}

struct Shared {
    inbox: Mutex<Inbox>,
    arrived: Condvar,
}

/// A bound-but-unconnected endpoint; exposes the actual listen address so
/// tests can build peer tables from ephemeral ports.
pub struct BoundTcpEndpoint {
    agent_id: AgentId,
    listener: TcpListener,
}

impl BoundTcpEndpoint {
    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("listener has an address")
    }

    /// Accepts `A - 1` inbound connections and dials every peer, retrying
    /// dials until `timeout`.
    pub fn connect(
        self,
        table: &TcpPeerTable,
        timeout: Duration,
    ) -> Result<TcpEndpoint, TransportError> {
        let agents = table.agent_count();
        let shared = Arc::new(Shared {
            inbox: Mutex::new(Inbox {
                messages: BTreeMap::new(),
                broken: None,
            }),
            arrived: Condvar::new(),
        });

        let acceptor = {
            let listener = self.listener;
            let shared = Arc::clone(&shared);
            let expected = agents - 1;
            std::thread::spawn(move || -> Result<(), String> {
                for _ in 0..expected {
                    let (stream, _) = listener.accept().map_err(|e| e.to_string())?;
                    let shared = Arc::clone(&shared);
                    std::thread::spawn(move || read_frames(stream, shared));
                }
                Ok(())
            })
        };

        let mut streams = Vec::new();
        let deadline = Instant::now() + timeout;
        for &(peer, addr) in &table.peers {
            if peer == self.agent_id {
                continue;
            }
            let stream = loop {
                match TcpStream::connect(addr) {
                    Ok(s) => break s,
                    Err(e) => {
                        if Instant::now() >= deadline {
                            return Err(TransportError::PeerUnreachable {
                                peer,
                                detail: e.to_string(),
                            });
                        }
                        std::thread::sleep(DIAL_RETRY);
                    }
                }
            };
            stream.set_nodelay(true).ok();
            streams.push((peer, Mutex::new(stream)));
        }

        acceptor
            .join()
            .map_err(|_| TransportError::Setup("acceptor thread panicked".into()))?
            .map_err(TransportError::Setup)?;

        Ok(TcpEndpoint {
            agent_id: self.agent_id,
            agents,
            timeout,
            peers: streams,
            shared,
            sent: Mutex::new(Vec::new()),
        })
    }
}

fn read_frames(mut stream: TcpStream, shared: Arc<Shared>) {
    loop {
        let mut len_buf = [0u8; 4];
        match stream.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(_) => return, // peer closed; normal shutdown
        }
        let len = u32::from_le_bytes(len_buf) as usize;
        let mut frame = vec![0u8; len];
        if stream.read_exact(&mut frame).is_err() {
            mark_broken(&shared, "connection dropped mid-frame");
            return;
        }
        match decode_message(&frame) {
            Ok(msg) => {
                let key = msg.slot();
                let mut inbox = shared.inbox.lock().expect("inbox poisoned");
                if inbox.messages.insert(key, msg).is_some() {
                    inbox.broken = Some(format!("duplicate message for slot {key:?}"));
                }
                drop(inbox);
                shared.arrived.notify_all();
            }
            Err(e) => {
                mark_broken(&shared, &e.to_string());
                return;
            }
        }
    }
}

fn mark_broken(shared: &Shared, detail: &str) {
    let mut inbox = shared.inbox.lock().expect("inbox poisoned");
    if inbox.broken.is_none() {
        inbox.broken = Some(detail.to_string());
    }
    drop(inbox);
    shared.arrived.notify_all();
}

pub struct TcpEndpoint {
    agent_id: AgentId,
    agents: usize,
    timeout: Duration,
    peers: Vec<(AgentId, Mutex<TcpStream>)>,
    shared: Arc<Shared>,
    sent: Mutex<Vec<ProtocolMessage>>,
}

impl TcpEndpoint {
    /// Binds a listener for `agent_id` at `addr` (use port 0 for an
    /// ephemeral port).
    pub fn bind(agent_id: AgentId, addr: &str) -> Result<BoundTcpEndpoint, TransportError> {
        let listener = TcpListener::bind(addr)
            .map_err(|e| TransportError::Setup(format!("bind {addr}: {e}")))?;
        Ok(BoundTcpEndpoint { agent_id, listener })
    }
}

impl Endpoint for TcpEndpoint {
    fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    fn agent_count(&self) -> usize {
        self.agents
    }

    fn broadcast(&self, msg: ProtocolMessage) -> Result<(), TransportError> {
        if msg.payload.phase() != msg.phase {
            return Err(TransportError::PhaseMismatch);
        }
        {
            let sent = self.sent.lock().expect("send log poisoned");
            if sent.iter().any(|m| m.slot() == msg.slot()) {
                return Err(TransportError::DuplicateMessage {
                    sender: msg.sender,
                    round: msg.round,
                    phase: msg.phase,
                });
            }
        }
        let bytes = encode_message(&msg)?;
        let mut frame = Vec::with_capacity(4 + bytes.len());
        frame.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        frame.extend_from_slice(&bytes);
        for (peer, stream) in &self.peers {
            let mut stream = stream.lock().expect("stream poisoned");
            stream
                .write_all(&frame)
                .map_err(|e| TransportError::PeerIo {
                    peer: *peer,
                    detail: e.to_string(),
                })?;
        }
        self.sent.lock().expect("send log poisoned").push(msg);
        Ok(())
    }

    fn collect(
        &self,
        round: u32,
        phase: MessagePhase,
    ) -> Result<Vec<ProtocolMessage>, TransportError> {
        let expected: Vec<AgentId> = self.peers.iter().map(|(id, _)| *id).collect();
        let deadline = Instant::now() + self.timeout;
        let mut inbox = self.shared.inbox.lock().expect("inbox poisoned");
        loop {
            if let Some(detail) = &inbox.broken {
                return Err(TransportError::Setup(detail.clone()));
            }
            let missing: Vec<AgentId> = expected
                .iter()
                .copied()
                .filter(|&a| !inbox.messages.contains_key(&(round, phase.wire_tag(), a)))
                .collect();
            if missing.is_empty() {
                let mut sorted = expected.clone();
                sorted.sort_unstable();
                return Ok(sorted
                    .iter()
                    .map(|&a| inbox.messages[&(round, phase.wire_tag(), a)].clone())
                    .collect());
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(TransportError::Timeout {
                    round,
                    phase,
                    missing,
                });
            }
            let (next, _) = self
                .shared
                .arrived
                .wait_timeout(inbox, deadline - now)
                .expect("inbox poisoned");
            inbox = next;
        }
    }

    fn sent(&self) -> Vec<ProtocolMessage> {
        self.sent.lock().expect("send log poisoned").clone()
    }
}

/// Binds all agents on localhost ephemeral ports and fully connects them.
/// Returns endpoints in agent-id order.
pub fn local_mesh(agents: usize, timeout: Duration) -> Result<Vec<TcpEndpoint>, TransportError> {
    let bound: Vec<BoundTcpEndpoint> = (0..agents as AgentId)
        .map(|id| TcpEndpoint::bind(id, "127.0.0.1:0"))
        .collect::<Result<_, _>>()?;
    let table = TcpPeerTable {
        peers: bound
            .iter()
            .map(|b| (b.agent_id, b.local_addr()))
            .collect(),
    };
    // Dialing blocks until peers accept, so connect concurrently.
    let handles: Vec<_> = bound
        .into_iter()
        .map(|b| {
            let table = table.clone();
            std::thread::spawn(move || b.connect(&table, timeout))
        })
        .collect();
    let mut endpoints = Vec::new();
    for h in handles {
        endpoints.push(h.join().map_err(|_| {
            TransportError::Setup("connect thread panicked".into())
        })??);
    }
    Ok(endpoints)
}
