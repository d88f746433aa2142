//! Export the impression and emotion trajectory of a run as CSV, ready for
//! plotting.

use std::sync::Arc;

use emoact::expression::DisplayMode;
use emoact::session::{export_csv, Autoplay, Session, SessionConfig, TracedSession};
use emoact::story::builtin;

fn main() {
    let mut config = SessionConfig::default();
    config.policy.mode = DisplayMode::HighFrequency;
    let session = Session::new(config, Arc::new(builtin("wizard").unwrap())).unwrap();
    let mut traced = TracedSession::new(session);
    Autoplay::default().play_path(&mut traced, &[]).unwrap();
    export_csv(traced.trace(), std::io::stdout().lock()).unwrap();
}
