//! Bit-exact wire codec.
//!
//! Frame layout, all multi-byte integers little-endian unless noted:
//!
//! ```text
//! magic    4 bytes  b"VCHR"
//! version  u8       1
//! phase    u8       0 = labels, 1 = medoid lists
//! sender   u16
//! round    u32
//! length   u32      payload byte count
//! payload  ...
//! ```
//!
//! Labels payload: `count: u32` then `count` labels as `u32`.
//! MedLists payload: `clusters: u32`, then per cluster `code_len: u8`,
//! `code_len` code components as `u32`, `cand_count: u16`, and the
//! candidate ids as `u32`. TCP frames prefix the whole message with a
//! `u32` byte length.

use thiserror::Error;

use super::{MessagePhase, Payload, ProtocolMessage};
use crate::consensus::RankedList;
use crate::model::{ClusterCode, SampleId};

pub const MAGIC: [u8; 4] = *b"VCHR";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("cluster code has {0} components; the wire format caps codes at 255 agents")]
    TooManyAgents(usize),
    #[error("ranked list has {0} candidates; the wire format caps lists at 65535 entries")]
    TooManyCandidates(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeErrorKind {
    BadMagic,
    BadVersion(u8),
    BadPhase(u8),
    Truncated,
    /// Payload content does not fill the declared payload length exactly.
    LengthMismatch,
    /// Bytes remain after a complete message.
    TrailingBytes,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("decode error at byte offset {offset}: {kind:?}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

pub fn encode_message(msg: &ProtocolMessage) -> Result<Vec<u8>, EncodeError> {
    let payload = encode_payload(&msg.payload)?;
    let mut out = Vec::with_capacity(16 + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg.phase.wire_tag());
    out.extend_from_slice(&msg.sender.to_le_bytes());
    out.extend_from_slice(&msg.round.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

fn encode_payload(payload: &Payload) -> Result<Vec<u8>, EncodeError> {
    let mut out = Vec::new();
    match payload {
        Payload::Labels(labels) => {
            out.extend_from_slice(&(labels.len() as u32).to_le_bytes());
            for &label in labels {
                out.extend_from_slice(&label.to_le_bytes());
            }
        }
        Payload::MedLists(lists) => {
            out.extend_from_slice(&(lists.len() as u32).to_le_bytes());
            for list in lists {
                let code = list.cluster_key.components();
                if code.len() > u8::MAX as usize {
                    return Err(EncodeError::TooManyAgents(code.len()));
                }
                if list.candidates.len() > u16::MAX as usize {
                    return Err(EncodeError::TooManyCandidates(list.candidates.len()));
                }
                out.push(code.len() as u8);
                for &c in code {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                out.extend_from_slice(&(list.candidates.len() as u16).to_le_bytes());
                for cand in &list.candidates {
                    out.extend_from_slice(&cand.0.to_le_bytes());
                }
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() - self.offset < n {
            return Err(DecodeError {
                offset: self.offset,
                kind: DecodeErrorKind::Truncated,
            });
        }
        let slice = &self.buf[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Decodes exactly one message; trailing bytes are an error.
pub fn decode_message(bytes: &[u8]) -> Result<ProtocolMessage, DecodeError> {
    let mut r = Reader {
        buf: bytes,
        offset: 0,
    };
    let magic_at = r.offset;
    if r.take(4)? != MAGIC {
        return Err(DecodeError {
            offset: magic_at,
            kind: DecodeErrorKind::BadMagic,
        });
    }
    let version_at = r.offset;
    let version = r.u8()?;
    if version != VERSION {
        return Err(DecodeError {
            offset: version_at,
            kind: DecodeErrorKind::BadVersion(version),
        });
    }
    let phase_at = r.offset;
    let phase = match r.u8()? {
        0 => MessagePhase::Labels,
        1 => MessagePhase::MedLists,
        other => {
            return Err(DecodeError {
                offset: phase_at,
                kind: DecodeErrorKind::BadPhase(other),
            })
        }
    };
    let sender = r.u16()?;
    let round = r.u32()?;
    let payload_len = r.u32()? as usize;
    let payload_start = r.offset;
    // Reserve the declared payload before parsing, so a short buffer is
    // reported as truncation at the right offset.
    if bytes.len() - payload_start < payload_len {
        return Err(DecodeError {
            offset: bytes.len(),
            kind: DecodeErrorKind::Truncated,
        });
    }
    let payload = match phase {
        MessagePhase::Labels => {
            let count = r.u32()? as usize;
            let mut labels = Vec::with_capacity(count.min(payload_len / 4 + 1));
            for _ in 0..count {
                labels.push(r.u32()?);
            }
            Payload::Labels(labels)
        }
        MessagePhase::MedLists => {
            let clusters = r.u32()? as usize;
            let mut lists = Vec::with_capacity(clusters.min(payload_len + 1));
            for _ in 0..clusters {
                let code_len = r.u8()? as usize;
                let mut code = Vec::with_capacity(code_len);
                for _ in 0..code_len {
                    code.push(r.u32()?);
                }
                let cand_count = r.u16()? as usize;
                let mut candidates = Vec::with_capacity(cand_count);
                for _ in 0..cand_count {
                    candidates.push(SampleId(r.u32()?));
                }
                lists.push(RankedList {
                    cluster_key: ClusterCode(code),
                    candidates,
                });
            }
            Payload::MedLists(lists)
        }
    };
    if r.offset - payload_start != payload_len {
        return Err(DecodeError {
            offset: r.offset,
            kind: DecodeErrorKind::LengthMismatch,
        });
    }
    if r.offset != bytes.len() {
        return Err(DecodeError {
            offset: r.offset,
            kind: DecodeErrorKind::TrailingBytes,
        });
    }
    Ok(ProtocolMessage {
        sender,
        round,
        phase,
        payload,
    })
}
