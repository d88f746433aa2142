//! Story sessions: the event-driven engine, its configuration, the wire
//! protocol, traces with replay, and tabular export.

mod autoplay;
mod config;
mod engine;
mod export;
mod protocol;
mod trace;

pub use autoplay::Autoplay;
pub use config::{ConfigError, SessionConfig, CONFIG_ENV};
pub use engine::{EventPayload, Phase, Session, SessionError, SessionEvent, Snapshot};
pub use export::{export_csv, export_jsonl, export_rows, ExportRow, EXPORT_COLUMNS};
pub use protocol::{
    decode, encode, ClientMessage, OptionView, ProtocolError, ServerMessage, PROTOCOL_VERSION,
};
pub use trace::{
    replay, Divergence, ReplayReport, SessionTrace, TraceError, TraceHeader, TraceRecord,
    TracedSession, TRACE_EXTENSION, TRACE_SCHEMA_VERSION,
};
