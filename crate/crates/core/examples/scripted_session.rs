//! Run a session from a script of wire-protocol records and print every
//! server message.
//!
//! cargo run --example scripted_session -- [script.jsonl]

use std::sync::Arc;

use emoact::session::{decode, encode, ClientMessage, Session, SessionConfig, TracedSession};
use emoact::story::builtin;

const DEFAULT_SCRIPT: &str = include_str!("scripts/wizard_positive.jsonl");

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable script"),
        None => DEFAULT_SCRIPT.to_string(),
    };
    let script: Vec<ClientMessage> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| decode(l).expect("valid record"))
        .collect();
    let story_id = match script.first() {
        Some(ClientMessage::StartSession { story: Some(s), .. }) => s.clone(),
        _ => "wizard".to_string(),
    };
    let session = Session::new(
        SessionConfig::default(),
        Arc::new(builtin(&story_id).unwrap()),
    )
    .unwrap();
    let mut traced = TracedSession::new(session);
    for msg in &script {
        println!(">> {}", encode(msg));
        match traced.handle(msg) {
            Ok(out) => out.iter().for_each(|m| println!("<< {}", encode(m))),
            Err(e) => {
                println!("!! rejected: {e}");
                break;
            }
        }
    }
    let snap = traced.session().snapshot();
    println!("\nfinal: {} at {}", snap.labeling.label, snap.emotion);
}
