//! Session traces and deterministic replay.
//!
//! A trace file (`.emoact-trace`) uses the wire encoding: one JSON record per
//! line. The first line is a `trace_header` carrying the full configuration
//! and story graph; each following `record` line holds one accepted client
//! event, the resulting affective state and every server message it caused.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::{EmotionLabel, EpaVector};
use crate::impression::Impression;
use crate::story::StoryGraph;

use super::config::SessionConfig;
use super::engine::{Session, SessionError, SessionEvent};
use super::protocol::{decode, encode, ClientMessage, ProtocolError, ServerMessage};

pub const TRACE_SCHEMA_VERSION: u32 = 1;
pub const TRACE_EXTENSION: &str = "emoact-trace";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: ProtocolError,
    },
    #[error("trace is empty")]
    Empty,
    #[error("trace line {0}: expected a trace_header")]
    MissingHeader(usize),
    #[error("trace line {0}: unexpected second header")]
    DuplicateHeader(usize),
    #[error("unsupported trace schema {0}")]
    Schema(u32),
    #[error("trace header cannot build a session: {0}")]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: u32,
    pub config: SessionConfig,
    pub story: StoryGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    pub event: ClientMessage,
    pub impression: Impression,
    pub emotion: EpaVector,
    pub label: EmotionLabel,
    pub similarity: Option<f64>,
    pub outputs: Vec<ServerMessage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    TraceHeader(Box<TraceHeader>),
    Record(Box<TraceRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl SessionTrace {
    pub fn new(config: SessionConfig, story: StoryGraph) -> Self {
        Self {
            header: TraceHeader {
                schema: TRACE_SCHEMA_VERSION,
                config,
                story,
            },
            records: Vec::new(),
        }
    }

    pub fn header_line(&self) -> String {
        encode(&TraceLine::TraceHeader(Box::new(self.header.clone())))
    }

    pub fn record_line(record: &TraceRecord) -> String {
        encode(&TraceLine::Record(Box::new(record.clone())))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header_line())?;
        for r in &self.records {
            writeln!(w, "{}", Self::record_line(r))?;
        }
        w.flush()
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("trace is utf-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, TraceError> {
        let mut header = None;
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TraceLine =
                decode(&line).map_err(|source| TraceError::Line { line: n, source })?;
            match (parsed, header.is_some()) {
                (TraceLine::TraceHeader(h), false) => {
                    if h.schema != TRACE_SCHEMA_VERSION {
                        return Err(TraceError::Schema(h.schema));
                    }
                    header = Some(*h);
                }
                (TraceLine::TraceHeader(_), true) => return Err(TraceError::DuplicateHeader(n)),
                (TraceLine::Record(_), false) => return Err(TraceError::MissingHeader(n)),
                (TraceLine::Record(r), true) => records.push(*r),
            }
        }
        let header = header.ok_or(TraceError::Empty)?;
        Ok(Self { header, records })
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        Self::read_from(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    /// A fresh session matching the header.
    pub fn fresh_session(&self) -> Result<Session, TraceError> {
        Ok(Session::new(
            self.header.config.clone(),
            Arc::new(self.header.story.clone()),
        )?)
    }
}

/// A session that records every accepted event into a trace.
#[derive(Debug, Clone)]
pub struct TracedSession {
    session: Session,
    trace: SessionTrace,
}

impl TracedSession {
    pub fn new(session: Session) -> Self {
        let trace = SessionTrace::new(session.config().clone(), (**session.story()).clone());
        Self { session, trace }
    }

    /// Apply a client message. Rejected messages are not recorded.
    pub fn handle(&mut self, msg: &ClientMessage) -> Result<Vec<ServerMessage>, SessionError> {
        let outputs = self.session.handle_event(&SessionEvent::from(msg))?;
        let snap = self.session.snapshot();
        self.trace.records.push(TraceRecord {
            seq: msg.seq(),
            event: msg.clone(),
            impression: snap.impression,
            emotion: snap.emotion,
            label: snap.labeling.label,
            similarity: snap.labeling.similarity,
            outputs: outputs.clone(),
        });
        Ok(outputs)
    }

    /// Apply messages in order, stopping at the first rejection.
    pub fn run(&mut self, script: &[ClientMessage]) -> Result<(), (u64, SessionError)> {
        for msg in script {
            self.handle(msg).map_err(|e| (msg.seq(), e))?;
        }
        Ok(())
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn trace(&self) -> &SessionTrace {
        &self.trace
    }

    pub fn last_record(&self) -> Option<&TraceRecord> {
        self.trace.records.last()
    }

    pub fn into_trace(self) -> SessionTrace {
        self.trace
    }
}

/// First point where a replay disagrees with the recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub seq: u64,
    pub field: String,
    pub recorded: String,
    pub replayed: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub events: usize,
    pub divergence: Option<Divergence>,
}

impl ReplayReport {
    pub fn is_ok(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "replay ok: {} events reproduced", self.events),
            Some(d) => write!(
                f,
                "replay diverged at seq {} in `{}`\n  recorded: {}\n  replayed: {}",
                d.seq, d.field, d.recorded, d.replayed
            ),
        }
    }
}

/// Re-execute a trace and compare every recorded field.
pub fn replay(trace: &SessionTrace) -> Result<ReplayReport, TraceError> {
    let mut session = trace.fresh_session()?;
    for (i, rec) in trace.records.iter().enumerate() {
        let diverge = |field: &str, recorded: String, replayed: String| ReplayReport {
            events: i,
            divergence: Some(Divergence {
                seq: rec.seq,
                field: field.to_string(),
                recorded,
                replayed,
            }),
        };
        if rec.seq != rec.event.seq() {
            return Ok(diverge(
                "seq",
                rec.seq.to_string(),
                rec.event.seq().to_string(),
            ));
        }
        let outputs = match session.handle_event(&SessionEvent::from(&rec.event)) {
            Ok(out) => out,
            Err(e) => {
                return Ok(diverge(
                    "event",
                    "accepted".into(),
                    format!("rejected: {e}"),
                ))
            }
        };
        let snap = session.snapshot();
        if snap.impression != rec.impression {
            return Ok(diverge(
                "impression",
                json(&rec.impression),
                json(&snap.impression),
            ));
        }
        if snap.emotion != rec.emotion {
            return Ok(diverge("emotion", json(&rec.emotion), json(&snap.emotion)));
        }
        if snap.labeling.label != rec.label {
            return Ok(diverge(
                "label",
                rec.label.to_string(),
                snap.labeling.label.to_string(),
            ));
        }
        if snap.labeling.similarity != rec.similarity {
            return Ok(diverge(
                "similarity",
                json(&rec.similarity),
                json(&snap.labeling.similarity),
            ));
        }
        let n = rec.outputs.len().max(outputs.len());
        for k in 0..n {
            let (a, b) = (rec.outputs.get(k), outputs.get(k));
            if a != b {
                return Ok(diverge(&format!("outputs[{k}]"), opt_line(a), opt_line(b)));
            }
        }
    }
    Ok(ReplayReport {
        events: trace.records.len(),
        divergence: None,
    })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

fn opt_line(m: Option<&ServerMessage>) -> String {
    m.map(encode).unwrap_or_else(|| "<none>".to_string())
}
