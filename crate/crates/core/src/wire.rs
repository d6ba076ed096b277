//! Wire codec shared by the TCP and WebSocket transports.
//!
//! Every message is `<decimal byte length>\n<compact JSON object>\n`. The JSON
//! object is an envelope `{"type", "session_id", "seq", "payload"}` whose
//! payload shape depends on `type`. See `docs/wire-format.md`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::gesture::PointerSample;
use crate::interaction::Mode;
use crate::view::{Overlay, SceneFrame};
use crate::world::{Actuation, Command, ObjectClass, RobotState};

/// Upper bound on one encoded message body.
pub const MAX_MESSAGE_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Control,
    View,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub role: Role,
    #[serde(default)]
    pub client: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub id: String,
    pub name: String,
    pub class: ObjectClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Welcome {
    pub session_id: String,
    pub role: Role,
    pub world_name: String,
    pub objects: Vec<ObjectSummary>,
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub seam_row: u32,
    pub overlap_rows: u32,
    pub frame_interval_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectStatus {
    pub id: String,
    pub actuation: Actuation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub sim_time_ms: u64,
    pub robot: RobotState,
    pub collision_count: u64,
    pub objects: Vec<ObjectStatus>,
    pub mode: Mode,
    pub locked_object: Option<String>,
    pub marker_mode: bool,
    pub marker_count: usize,
    pub commands_applied: u64,
    pub last_command: Option<Command>,
    /// Obstacle marker the last base step was warned about.
    pub advisory: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub ack_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlays {
    pub overlays: Vec<Overlay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bye {
    #[serde(default)]
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Hello(Hello),
    Welcome(Welcome),
    Frame(Box<SceneFrame>),
    Pointer(PointerSample),
    Ack(Ack),
    StateUpdate(Box<StateUpdate>),
    Overlay(Overlays),
    Error(ErrorBody),
    Bye(Bye),
}

impl Body {
    pub fn type_name(&self) -> &'static str {
        match self {
            Body::Hello(_) => "Hello",
            Body::Welcome(_) => "Welcome",
            Body::Frame(_) => "Frame",
            Body::Pointer(_) => "Pointer",
            Body::Ack(_) => "Ack",
            Body::StateUpdate(_) => "StateUpdate",
            Body::Overlay(_) => "Overlay",
            Body::Error(_) => "Error",
            Body::Bye(_) => "Bye",
        }
    }

    fn payload(&self) -> Result<Value, serde_json::Error> {
        match self {
            Body::Hello(p) => serde_json::to_value(p),
            Body::Welcome(p) => serde_json::to_value(p),
            Body::Frame(p) => serde_json::to_value(p),
            Body::Pointer(p) => serde_json::to_value(p),
            Body::Ack(p) => serde_json::to_value(p),
            Body::StateUpdate(p) => serde_json::to_value(p),
            Body::Overlay(p) => serde_json::to_value(p),
            Body::Error(p) => serde_json::to_value(p),
            Body::Bye(p) => serde_json::to_value(p),
        }
    }

    fn from_payload(type_name: &str, v: Value) -> Result<Body, String> {
        fn de<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, String> {
            serde_json::from_value(v).map_err(|e| e.to_string())
        }
        Ok(match type_name {
            "Hello" => Body::Hello(de(v)?),
            "Welcome" => Body::Welcome(de(v)?),
            "Frame" => Body::Frame(Box::new(de(v)?)),
            "Pointer" => Body::Pointer(de(v)?),
            "Ack" => Body::Ack(de(v)?),
            "StateUpdate" => Body::StateUpdate(Box::new(de(v)?)),
            "Overlay" => Body::Overlay(de(v)?),
            "Error" => Body::Error(de(v)?),
            "Bye" => Body::Bye(de(v)?),
            other => return Err(format!("unknown message type `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireMessage {
    pub session_id: String,
    pub seq: u64,
    pub body: Body,
}

impl WireMessage {
    pub fn new(session_id: impl Into<String>, seq: u64, body: Body) -> Self {
        Self {
            session_id: session_id.into(),
            seq,
            body,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    #[serde(rename = "type")]
    type_name: String,
    session_id: String,
    seq: u64,
    payload: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated message at byte {offset}")]
    Truncated { offset: usize },
    #[error("bad length header at byte {offset}")]
    BadHeader { offset: usize },
    #[error("message of {len} bytes exceeds the limit")]
    TooLarge { len: usize },
    #[error("malformed JSON at byte {offset}: {reason}")]
    Json { offset: usize, reason: String },
    #[error("missing newline terminator at byte {offset}")]
    MissingTerminator { offset: usize },
    #[error("invalid payload for {type_name} (body starts at byte {offset}): {reason}")]
    Payload {
        offset: usize,
        type_name: String,
        reason: String,
    },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match self {
            DecodeError::Truncated { offset }
            | DecodeError::BadHeader { offset }
            | DecodeError::Json { offset, .. }
            | DecodeError::MissingTerminator { offset }
            | DecodeError::Payload { offset, .. } => *offset,
            DecodeError::TooLarge { .. } => 0,
        }
    }
}

#[derive(Debug, Error)]
#[error("cannot encode message: {0}")]
pub struct EncodeError(#[from] serde_json::Error);

/// The JSON body alone, without framing.
pub fn encode_json(msg: &WireMessage) -> Result<String, EncodeError> {
    let env = Envelope {
        type_name: msg.body.type_name().to_string(),
        session_id: msg.session_id.clone(),
        seq: msg.seq,
        payload: msg.body.payload()?,
    };
    Ok(serde_json::to_string(&env)?)
}

pub fn encode(msg: &WireMessage) -> Result<Vec<u8>, EncodeError> {
    let json = encode_json(msg)?;
    let mut out = Vec::with_capacity(json.len() + 12);
    out.extend_from_slice(json.len().to_string().as_bytes());
    out.push(b'\n');
    out.extend_from_slice(json.as_bytes());
    out.push(b'\n');
    Ok(out)
}

/// Decodes one framed message from the front of `bytes`, returning it and
/// the number of bytes consumed.
pub fn decode(bytes: &[u8]) -> Result<(WireMessage, usize), DecodeError> {
    let nl = match bytes.iter().position(|&b| b == b'\n') {
        Some(i) => i,
        None if bytes.len() > 20 || bytes.iter().any(|b| !b.is_ascii_digit()) => {
            return Err(DecodeError::BadHeader {
                offset: bytes.iter().position(|b| !b.is_ascii_digit()).unwrap_or(20),
            })
        }
        None => return Err(DecodeError::Truncated { offset: bytes.len() }),
    };
    let header = &bytes[..nl];
    if header.is_empty() || header.len() > 20 {
        return Err(DecodeError::BadHeader { offset: 0 });
    }
    if let Some(i) = header.iter().position(|b| !b.is_ascii_digit()) {
        return Err(DecodeError::BadHeader { offset: i });
    }
    let len: usize = std::str::from_utf8(header)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(DecodeError::BadHeader { offset: 0 })?;
    if len > MAX_MESSAGE_BYTES {
        return Err(DecodeError::TooLarge { len });
    }
    let start = nl + 1;
    let end = start + len;
    if bytes.len() < end {
        return Err(DecodeError::Truncated { offset: bytes.len() });
    }
    match bytes.get(end) {
        Some(b'\n') => {}
        Some(_) => return Err(DecodeError::MissingTerminator { offset: end }),
        None => return Err(DecodeError::Truncated { offset: bytes.len() }),
    }
    let msg = decode_json_at(&bytes[start..end], start)?;
    Ok((msg, end + 1))
}

/// Decodes a bare JSON envelope. `base` is added to reported offsets.
pub fn decode_json_at(json: &[u8], base: usize) -> Result<WireMessage, DecodeError> {
    let env: Envelope = serde_json::from_slice(json).map_err(|e| DecodeError::Json {
        offset: base + json_error_offset(json, &e),
        reason: e.to_string(),
    })?;
    let body = Body::from_payload(&env.type_name, env.payload).map_err(|reason| DecodeError::Payload {
        offset: base,
        type_name: env.type_name.clone(),
        reason,
    })?;
    Ok(WireMessage {
        session_id: env.session_id,
        seq: env.seq,
        body,
    })
}

fn json_error_offset(json: &[u8], e: &serde_json::Error) -> usize {
    if e.line() == 0 {
        return 0;
    }
    let mut line_start = 0;
    for _ in 1..e.line() {
        match json[line_start..].iter().position(|&b| b == b'\n') {
            Some(i) => line_start += i + 1,
            None => break,
        }
    }
    (line_start + e.column().saturating_sub(1)).min(json.len())
}

/// Incremental decoder for a byte stream.
#[derive(Debug, Default)]
pub struct StreamDecoder {
    buf: Vec<u8>,
}

impl StreamDecoder {
    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next complete message, `Ok(None)` if more bytes are needed. A hard
    /// error leaves the stream unusable.
    pub fn next_message(&mut self) -> Result<Option<WireMessage>, DecodeError> {
        if self.buf.is_empty() {
            return Ok(None);
        }
        match decode(&self.buf) {
            Ok((msg, used)) => {
                self.buf.drain(..used);
                Ok(Some(msg))
            }
            Err(DecodeError::Truncated { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}
