//! Record a session, save the trace, replay it, then tamper with one
//! snapshot and show the reported divergence.

use std::sync::Arc;

use emoact::session::{replay, Autoplay, Session, SessionConfig, SessionTrace, TracedSession};
use emoact::story::builtin;

fn main() {
    let story = Arc::new(builtin("detective").unwrap());
    let mut traced = TracedSession::new(Session::new(SessionConfig::default(), story).unwrap());
    Autoplay::default()
        .play_path(
            &mut traced,
            &[
                "take_shortcut",
                "talk_yourself",
                "stop_robot",
                "scary_place",
            ],
        )
        .unwrap();

    let path = std::env::temp_dir().join("replay_example.emoact-trace");
    traced.trace().save(&path).unwrap();
    println!(
        "wrote {} ({} records)",
        path.display(),
        traced.trace().records.len()
    );

    let loaded = SessionTrace::load(&path).unwrap();
    println!("{}", replay(&loaded).unwrap());

    let mut tampered = loaded.clone();
    tampered.records[7].emotion.e += 0.25;
    println!("{}", replay(&tampered).unwrap());
}
