//! Wire messages. Every message is a JSON object tagged by `"type"`.

use bigen_core::{GeneratorParams, ParamPatch};
use serde::{Deserialize, Serialize};

use crate::report::{BlccJson, Counts, FitJson, Histograms, NeighborhoodJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlAction {
    Start,
    Pause,
    Resume,
    Reset,
    SetSpeed,
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    ParamUpdate {
        patch: ParamPatch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client_tag: Option<String>,
    },
    Control {
        action: ControlAction,
        /// Iterations per second; only read by `set_speed`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFlags {
    pub running: bool,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: String,
    pub seq: u64,
    pub t: u64,
    pub params: GeneratorParams,
    pub counts: Counts,
    /// Lowest degree bins plus a tail bucket.
    pub histograms: Histograms,
    pub blcc: BlccJson,
    pub neighborhood: NeighborhoodJson,
    pub fit: FitJson,
    /// BLCC and neighborhood means come from a node sample.
    pub sampled: bool,
    pub state: RunFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_tag: Option<String>,
    /// The patch governs iterations after this `t`.
    pub applied_at_t: u64,
    pub params: GeneratorParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMessage {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_tag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidParams,
    BadMessage,
    UnknownSession,
    TooManySessions,
    TooLarge,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ServerMessage {
    Snapshot(Snapshot),
    Ack(Ack),
    Error(ErrorMessage),
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error(ErrorMessage { code, message: message.into(), field: None, client_tag: None })
    }

    /// Rejection of invalid parameters, naming the offending field.
    pub fn invalid(err: &bigen_core::Error, client_tag: Option<String>) -> Self {
        let field = match err {
            bigen_core::Error::InvalidParam { field, .. } => Some((*field).to_string()),
            bigen_core::Error::ImmutablePairs => Some("m".to_string()),
            _ => None,
        };
        ServerMessage::Error(ErrorMessage { code: ErrorCode::InvalidParams, message: err.to_string(), field, client_tag })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }
}
