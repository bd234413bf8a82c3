//! Newline-delimited JSON wire protocol spoken with external classifiers.
//!
//! ```text
//! engine → {"type":"hello","schema_version":1,"n_vertices":116}
//! shim   → {"type":"ready"}
//! engine → {"type":"classify","edges":[[0,1],[2,3]]}
//! shim   → {"type":"label","label":0}
//! shim   → {"type":"error","message":"..."}
//! ```
//!
//! One JSON object per line. Edges are `[u, v]` pairs with `u < v`; labels
//! are the integers 0 or 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::Label;

pub const PROTOCOL_VERSION: u32 = 1;

/// Longest line either side will accept.
pub const MAX_LINE_BYTES: usize = 64 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Hello { schema_version: u32, n_vertices: usize },
    Ready,
    Classify { edges: Vec<[u64; 2]> },
    Label { label: i64 },
    Error { message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unexpected message type {0:?}")]
    Unexpected(&'static str),
    #[error("invalid label {0}, expected 0 or 1")]
    InvalidLabel(i64),
    #[error("invalid edge [{0},{1}]: {2}")]
    InvalidEdge(u64, u64, &'static str),
}

impl Message {
    fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "hello",
            Message::Ready => "ready",
            Message::Classify { .. } => "classify",
            Message::Label { .. } => "label",
            Message::Error { .. } => "error",
        }
    }

    /// Single-line encoding, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("protocol messages always serialize")
    }
}

pub fn hello(n_vertices: usize) -> Message {
    Message::Hello {
        schema_version: PROTOCOL_VERSION,
        n_vertices,
    }
}

pub fn classify_request(g: &Graph) -> Message {
    Message::Classify {
        edges: g.edges().map(|e| [e.u as u64, e.v as u64]).collect(),
    }
}

fn parse_message(line: &str) -> Result<Message, ProtocolError> {
    if line.len() > MAX_LINE_BYTES {
        return Err(ProtocolError::Malformed("line too long".into()));
    }
    serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| ProtocolError::Malformed(e.to_string()))
}

/// What the engine may receive from a classifier process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Ready,
    Label(Label),
    Error(String),
}

pub fn parse_response(line: &str) -> Result<Response, ProtocolError> {
    match parse_message(line)? {
        Message::Ready => Ok(Response::Ready),
        Message::Label { label } => Label::try_from(label)
            .map(Response::Label)
            .map_err(|_| ProtocolError::InvalidLabel(label)),
        Message::Error { message } => Ok(Response::Error(message)),
        other => Err(ProtocolError::Unexpected(other.kind())),
    }
}

/// What a classifier process may receive from the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Hello { schema_version: u32, n_vertices: usize },
    Classify { edges: Vec<(usize, usize)> },
}

/// Parses and validates an engine request. `n_vertices`, when known from
/// the handshake, bounds edge endpoints.
pub fn parse_request(line: &str, n_vertices: Option<usize>) -> Result<Request, ProtocolError> {
    match parse_message(line)? {
        Message::Hello {
            schema_version,
            n_vertices,
        } => Ok(Request::Hello {
            schema_version,
            n_vertices,
        }),
        Message::Classify { edges } => {
            let mut out = Vec::with_capacity(edges.len());
            for [u, v] in edges {
                if u >= v {
                    return Err(ProtocolError::InvalidEdge(u, v, "expected u < v"));
                }
                if let Some(n) = n_vertices {
                    if v >= n as u64 {
                        return Err(ProtocolError::InvalidEdge(u, v, "vertex out of range"));
                    }
                }
                let u = usize::try_from(u).map_err(|_| ProtocolError::InvalidEdge(u, v, "vertex out of range"))?;
                let v = usize::try_from(v).map_err(|_| ProtocolError::InvalidEdge(u as u64, v, "vertex out of range"))?;
                out.push((u, v));
            }
            Ok(Request::Classify { edges: out })
        }
        other => Err(ProtocolError::Unexpected(other.kind())),
    }
}
