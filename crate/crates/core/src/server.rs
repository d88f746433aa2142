//! Network front end.
//!
//! Clients speak the line protocol from [`crate::session`] either over plain
//! TCP (one record per line) or over WebSocket (one record per text frame).
//! The first message on a connection must be `start_session`; passing
//! `resume` with a previously issued session id reattaches to that session
//! instead of creating a new one. Every `state_update` sent by the server
//! carries the session id.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

use tungstenite::Message;

use crate::session::{
    decode, encode, ClientMessage, ProtocolError, ServerMessage, Session, SessionConfig,
    SessionTrace, TracedSession, TRACE_EXTENSION,
};
use crate::story::{builtin, StoryGraph};

struct Slot {
    traced: TracedSession,
    trace_file: Option<File>,
}

#[derive(Default)]
struct Registry {
    sessions: Mutex<HashMap<String, Arc<Mutex<Slot>>>>,
    counter: Mutex<u64>,
}

/// Shared state for all connections.
#[derive(Clone)]
pub struct Server {
    base: SessionConfig,
    stories: Arc<HashMap<String, Arc<StoryGraph>>>,
    trace_dir: Option<PathBuf>,
    registry: Arc<Registry>,
}

impl Server {
    /// Serves the built-in stories plus `extra`.
    pub fn new(base: SessionConfig, extra: Vec<StoryGraph>, trace_dir: Option<PathBuf>) -> Self {
        let mut stories = HashMap::new();
        for id in crate::story::BUILTIN_STORIES {
            if let Ok(g) = builtin(id) {
                stories.insert(id.to_string(), Arc::new(g));
            }
        }
        for g in extra {
            stories.insert(g.id.clone(), Arc::new(g));
        }
        Self {
            base,
            stories: Arc::new(stories),
            trace_dir,
            registry: Arc::default(),
        }
    }

    pub fn connection(&self) -> Connection {
        Connection {
            server: self.clone(),
            attached: None,
        }
    }

    /// Accept newline-delimited TCP clients until the listener fails.
    pub fn serve_tcp(&self, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            let stream = stream?;
            let conn = self.connection();
            thread::spawn(move || {
                let _ = conn.run_tcp(stream);
            });
        }
        Ok(())
    }

    /// Accept WebSocket clients until the listener fails.
    pub fn serve_ws(&self, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            let stream = stream?;
            let conn = self.connection();
            thread::spawn(move || {
                let _ = conn.run_ws(stream);
            });
        }
        Ok(())
    }

    fn create(
        &self,
        msg: &ClientMessage,
    ) -> Result<(String, Arc<Mutex<Slot>>), Box<ServerMessage>> {
        let ClientMessage::StartSession {
            story,
            policy,
            seed,
            ..
        } = msg
        else {
            unreachable!("create is only called for start_session");
        };
        let story_id = story.clone().unwrap_or_else(|| self.base.story.clone());
        let graph = self.stories.get(&story_id).cloned().ok_or_else(|| {
            Box::new(ServerMessage::error(
                Some(msg.seq()),
                "story_not_found",
                format!("story not found: {story_id}"),
            ))
        })?;
        let mut config = self.base.clone();
        if let Some(mode) = policy {
            config.policy.mode = *mode;
        }
        if let Some(seed) = seed {
            config.seed = *seed;
        }
        let session = Session::new(config, graph).map_err(|e| {
            Box::new(ServerMessage::error(
                Some(msg.seq()),
                e.code(),
                e.to_string(),
            ))
        })?;
        let id = {
            let mut n = self.registry.counter.lock().expect("registry lock");
            *n += 1;
            format!("s{n}")
        };
        let traced = TracedSession::new(session);
        let trace_file = match &self.trace_dir {
            Some(dir) => Some(open_trace(dir, &id, traced.trace()).map_err(|e| {
                Box::new(ServerMessage::error(
                    Some(msg.seq()),
                    "trace_io",
                    format!("cannot open trace file: {e}"),
                ))
            })?),
            None => None,
        };
        let slot = Arc::new(Mutex::new(Slot { traced, trace_file }));
        self.registry
            .sessions
            .lock()
            .expect("registry lock")
            .insert(id.clone(), Arc::clone(&slot));
        Ok((id, slot))
    }

    fn lookup(&self, id: &str) -> Option<Arc<Mutex<Slot>>> {
        self.registry
            .sessions
            .lock()
            .expect("registry lock")
            .get(id)
            .cloned()
    }
}

fn open_trace(dir: &std::path::Path, id: &str, trace: &SessionTrace) -> std::io::Result<File> {
    std::fs::create_dir_all(dir)?;
    let mut file = OpenOptions::new()
        .create(true)
        .truncate(true)
        .write(true)
        .open(dir.join(format!("{id}.{TRACE_EXTENSION}")))?;
    writeln!(file, "{}", trace.header_line())?;
    Ok(file)
}

/// One client connection, attached to at most one session.
pub struct Connection {
    server: Server,
    attached: Option<(String, Arc<Mutex<Slot>>)>,
}

impl Connection {
    pub fn session_id(&self) -> Option<&str> {
        self.attached.as_ref().map(|(id, _)| id.as_str())
    }

    /// Handle one raw protocol line and return encoded replies.
    pub fn handle_line(&mut self, line: &str) -> Vec<String> {
        let replies = match decode::<ClientMessage>(line) {
            Ok(msg) => self.handle(&msg),
            Err(ProtocolError::Version(v)) => vec![ServerMessage::error(
                None,
                "version",
                ProtocolError::Version(v).to_string(),
            )],
            Err(e) => vec![ServerMessage::error(None, "malformed", e.to_string())],
        };
        replies.iter().map(encode).collect()
    }

    pub fn handle(&mut self, msg: &ClientMessage) -> Vec<ServerMessage> {
        if let ClientMessage::StartSession {
            resume: Some(id), ..
        } = msg
        {
            return match self.server.lookup(id) {
                Some(slot) => {
                    let reply = {
                        let guard = slot.lock().expect("session lock");
                        resume_state(&guard.traced, id)
                    };
                    self.attached = Some((id.clone(), slot));
                    reply
                }
                None => vec![ServerMessage::error(
                    Some(msg.seq()),
                    "unknown_session",
                    format!("no session `{id}`"),
                )],
            };
        }
        if matches!(msg, ClientMessage::StartSession { .. }) && self.attached.is_none() {
            match self.server.create(msg) {
                Ok(attached) => self.attached = Some(attached),
                Err(e) => return vec![*e],
            }
        }
        let Some((id, slot)) = &self.attached else {
            return vec![ServerMessage::error(
                Some(msg.seq()),
                "not_started",
                "send start_session first",
            )];
        };
        let mut guard = slot.lock().expect("session lock");
        match guard.traced.handle(msg) {
            Ok(mut out) => {
                let record = guard.traced.last_record().map(SessionTrace::record_line);
                if let (Some(file), Some(line)) = (guard.trace_file.as_mut(), record) {
                    let _ = writeln!(file, "{line}");
                }
                tag(&mut out, id);
                out
            }
            Err(e) => vec![ServerMessage::error(
                Some(msg.seq()),
                e.code(),
                e.to_string(),
            )],
        }
    }

    fn run_tcp(mut self, stream: TcpStream) -> std::io::Result<()> {
        let mut writer = stream.try_clone()?;
        for line in BufReader::new(stream).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for reply in self.handle_line(&line) {
                writeln!(writer, "{reply}")?;
            }
            writer.flush()?;
        }
        Ok(())
    }

    fn run_ws(mut self, stream: TcpStream) -> Result<(), Box<tungstenite::Error>> {
        let mut ws = tungstenite::accept(stream).map_err(|e| match e {
            tungstenite::HandshakeError::Failure(e) => Box::new(e),
            tungstenite::HandshakeError::Interrupted(_) => {
                Box::new(tungstenite::Error::ConnectionClosed)
            }
        })?;
        loop {
            let text = match ws.read()? {
                Message::Text(t) => t,
                Message::Close(_) => return Ok(()),
                _ => continue,
            };
            for reply in self.handle_line(&text) {
                ws.send(Message::Text(reply))?;
            }
        }
    }
}

fn tag(out: &mut [ServerMessage], id: &str) {
    for m in out {
        if let ServerMessage::StateUpdate { session_id, .. } = m {
            *session_id = Some(id.to_string());
        }
    }
}

/// Everything the session has sent so far, so a reconnecting client can
/// rebuild its view.
fn resume_state(traced: &TracedSession, id: &str) -> Vec<ServerMessage> {
    let mut out: Vec<ServerMessage> = traced
        .trace()
        .records
        .iter()
        .flat_map(|r| r.outputs.iter().cloned())
        .collect();
    tag(&mut out, id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(msg: &ClientMessage) -> String {
        encode(msg)
    }

    #[test]
    fn start_then_tick_tags_session_id() {
        let server = Server::new(SessionConfig::default(), vec![], None);
        let mut conn = server.connection();
        let replies = conn.handle_line(&line(&ClientMessage::start(0, 0, Some("wizard"))));
        assert!(
            replies.iter().any(|r| r.contains(r#""session_id":"s1""#)),
            "{replies:?}"
        );
        let replies = conn.handle_line(&line(&ClientMessage::Tick { seq: 1, t: 5000 }));
        assert!(replies.iter().any(|r| r.contains(r#""type":"narration""#)));
    }

    #[test]
    fn errors_before_start_and_on_garbage() {
        let server = Server::new(SessionConfig::default(), vec![], None);
        let mut conn = server.connection();
        let r = conn.handle_line(&line(&ClientMessage::Tick { seq: 0, t: 0 }));
        assert!(r[0].contains(r#""code":"not_started""#));
        let r = conn.handle_line("{{{");
        assert!(r[0].contains(r#""code":"malformed""#));
        let r = conn.handle_line(&line(&ClientMessage::start(0, 0, Some("pirates"))));
        assert!(r[0].contains(r#""code":"story_not_found""#));
    }

    #[test]
    fn resume_reattaches() {
        let server = Server::new(SessionConfig::default(), vec![], None);
        let mut a = server.connection();
        a.handle(&ClientMessage::start(0, 0, Some("detective")));
        let id = a.session_id().unwrap().to_string();
        drop(a);
        let mut b = server.connection();
        let r = b.handle(&ClientMessage::StartSession {
            seq: 1,
            t: 0,
            story: None,
            policy: None,
            seed: None,
            resume: Some(id.clone()),
        });
        assert!(
            matches!(&r[0], ServerMessage::StateUpdate { session_id: Some(s), .. } if *s == id)
        );
        assert!(r
            .iter()
            .any(|m| matches!(m, ServerMessage::Narration { .. })));
        let r = b.handle(&ClientMessage::Tick { seq: 1, t: 5000 });
        assert!(!matches!(r[0], ServerMessage::Error { .. }), "{r:?}");
    }

    #[test]
    fn trace_dir_receives_replayable_trace() {
        let dir = tempfile::tempdir().unwrap();
        let server = Server::new(
            SessionConfig::default(),
            vec![],
            Some(dir.path().to_path_buf()),
        );
        let mut conn = server.connection();
        conn.handle(&ClientMessage::start(0, 0, Some("wizard")));
        conn.handle(&ClientMessage::Tick { seq: 1, t: 5000 });
        let trace = SessionTrace::load(dir.path().join("s1.emoact-trace")).unwrap();
        assert_eq!(trace.records.len(), 2);
        assert!(crate::session::replay(&trace).unwrap().is_ok());
    }
}
