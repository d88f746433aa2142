//! Line-oriented wire protocol.
//!
//! Every message is one JSON object on its own line, carrying the protocol
//! version `v` and a `type` tag. The same records are used for live
//! connections, script files and traces.
//!
//! ```text
//! {"v":1,"type":"start_session","seq":0,"t":0,"story":"wizard"}
//! {"v":1,"type":"perception","seq":1,"t":800,"kind":"gaze","on_agent":true}
//! {"v":1,"type":"tick","seq":2,"t":5000}
//! {"v":1,"type":"choice","seq":3,"t":9000,"option":"go_on_adventure"}
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::{EmotionLabel, EpaVector};
use crate::expression::{AnimationId, DisplayMode, EyeColor, Trigger};
use crate::impression::PerceptionKind;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("unsupported protocol version {0} (expected {PROTOCOL_VERSION})")]
    Version(u32),
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

/// Serialize a message as one line (no trailing newline).
pub fn encode<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(&Envelope {
        v: PROTOCOL_VERSION,
        body: msg,
    })
    .expect("protocol messages always serialize")
}

pub fn decode<T: DeserializeOwned>(line: &str) -> Result<T, ProtocolError> {
    let env: Envelope<serde_json::Value> =
        serde_json::from_str(line.trim()).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    if env.v != PROTOCOL_VERSION {
        return Err(ProtocolError::Version(env.v));
    }
    serde_json::from_value(env.body).map_err(|e| ProtocolError::Malformed(e.to_string()))
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    StartSession {
        seq: u64,
        t: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        story: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        policy: Option<DisplayMode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Reattach to a running session instead of starting one.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resume: Option<String>,
    },
    Choice {
        seq: u64,
        t: u64,
        option: String,
    },
    Perception {
        seq: u64,
        t: u64,
        #[serde(flatten)]
        perception: PerceptionKind,
    },
    Tick {
        seq: u64,
        t: u64,
    },
}

impl ClientMessage {
    pub fn seq(&self) -> u64 {
        match self {
            ClientMessage::StartSession { seq, .. }
            | ClientMessage::Choice { seq, .. }
            | ClientMessage::Perception { seq, .. }
            | ClientMessage::Tick { seq, .. } => *seq,
        }
    }

    pub fn start(seq: u64, t: u64, story: Option<&str>) -> Self {
        ClientMessage::StartSession {
            seq,
            t,
            story: story.map(str::to_string),
            policy: None,
            seed: None,
            resume: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionView {
    pub id: String,
    pub text: String,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServerMessage {
    Narration {
        seq: u64,
        t: u64,
        node: String,
        text: String,
    },
    DecisionRequest {
        seq: u64,
        t: u64,
        node: String,
        prompt: String,
        options: Vec<OptionView>,
    },
    ExpressionCue {
        seq: u64,
        t: u64,
        label: EmotionLabel,
        eye_color: EyeColor,
        animation: Option<AnimationId>,
        trigger: Trigger,
    },
    StateUpdate {
        seq: u64,
        t: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
        impression: EpaVector,
        emotion: EpaVector,
        label: EmotionLabel,
        similarity: Option<f64>,
        node: String,
        finished: bool,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seq: Option<u64>,
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(seq: Option<u64>, code: &str, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            seq,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encodes_one_line_with_version() {
        let line = encode(&ClientMessage::Tick { seq: 2, t: 5000 });
        assert_eq!(line, r#"{"v":1,"type":"tick","seq":2,"t":5000}"#);
    }

    #[test]
    fn perception_wire_format() {
        let msg: ClientMessage =
            decode(r#"{"v":1,"type":"perception","seq":1,"t":800,"kind":"gaze","on_agent":true}"#)
                .unwrap();
        assert_eq!(
            msg,
            ClientMessage::Perception {
                seq: 1,
                t: 800,
                perception: PerceptionKind::Gaze { on_agent: true }
            }
        );
        let msg: ClientMessage = decode(
            r#"{"v":1,"type":"perception","seq":1,"t":800,"kind":"user_emotion","valence":-0.6}"#,
        )
        .unwrap();
        assert!(matches!(
            msg,
            ClientMessage::Perception {
                perception: PerceptionKind::UserEmotion { .. },
                ..
            }
        ));
    }

    #[test]
    fn start_session_policy_aliases() {
        let msg: ClientMessage = decode(
            r#"{"v":1,"type":"start_session","seq":0,"t":0,"story":"wizard","policy":"high"}"#,
        )
        .unwrap();
        match msg {
            ClientMessage::StartSession { policy, story, .. } => {
                assert_eq!(policy, Some(DisplayMode::HighFrequency));
                assert_eq!(story.as_deref(), Some("wizard"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_version_and_garbage() {
        assert!(matches!(
            decode::<ClientMessage>(r#"{"v":2,"type":"tick","seq":0,"t":0}"#),
            Err(ProtocolError::Version(2))
        ));
        assert!(decode::<ClientMessage>("not json").is_err());
        assert!(decode::<ClientMessage>(r#"{"v":1,"type":"dance","seq":0,"t":0}"#).is_err());
    }

    proptest! {
        #[test]
        fn state_update_round_trips_bit_exact(
            e in -4.0f64..4.0, p in -4.0f64..4.0, a in -4.0f64..4.0,
            sim in proptest::option::of(-1.0f64..1.0),
        ) {
            let msg = ServerMessage::StateUpdate {
                seq: 3,
                t: 12,
                session_id: None,
                impression: EpaVector::new(e, p, a),
                emotion: EpaVector::new(a, e, p),
                label: EmotionLabel::Fear,
                similarity: sim,
                node: "n".into(),
                finished: false,
            };
            let back: ServerMessage = decode(&encode(&msg)).unwrap();
            prop_assert_eq!(back, msg);
        }
    }
}
