use crate::story::NodeId;

use super::engine::{Phase, SessionError};
use super::protocol::{ClientMessage, OptionView};
use super::trace::TracedSession;

/// Drives a session to its end with a fixed cadence: one `tick` every
/// `sentence_ms`, and a choice `think_ms` after each decision request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Autoplay {
    pub sentence_ms: u64,
    pub think_ms: u64,
}

impl Default for Autoplay {
    fn default() -> Self {
        Self {
            sentence_ms: 5_000,
            think_ms: 2_000,
        }
    }
}

impl Autoplay {
    /// Play until the story finishes, asking `choose` at every decision.
    /// Returns the client messages that were sent.
    pub fn play<F>(
        &self,
        traced: &mut TracedSession,
        mut choose: F,
    ) -> Result<Vec<ClientMessage>, (u64, SessionError)>
    where
        F: FnMut(&NodeId, &[OptionView]) -> String,
    {
        let mut sent = Vec::new();
        loop {
            let session = traced.session();
            let seq = session.next_seq();
            let t = session.last_timestamp();
            let msg = match session.phase() {
                Phase::NotStarted => {
                    ClientMessage::start(seq, t.unwrap_or(0), Some(&session.story().id))
                }
                Phase::Narrating => ClientMessage::Tick {
                    seq,
                    t: t.unwrap_or(0) + self.sentence_ms,
                },
                Phase::AwaitingChoice => {
                    let cursor = session.cursor().clone();
                    let options: Vec<OptionView> = session
                        .story()
                        .node(&cursor)
                        .and_then(|n| n.options())
                        .map(|opts| {
                            opts.iter()
                                .map(|o| OptionView {
                                    id: o.id.clone(),
                                    text: o.text.clone(),
                                })
                                .collect()
                        })
                        .unwrap_or_default();
                    ClientMessage::Choice {
                        seq,
                        t: t.unwrap_or(0) + self.think_ms,
                        option: choose(&cursor, &options),
                    }
                }
                Phase::Finished => return Ok(sent),
            };
            traced.handle(&msg).map_err(|e| (seq, e))?;
            sent.push(msg);
        }
    }

    /// Play a fixed sequence of option ids; the first option is taken once
    /// the list runs out.
    pub fn play_path(
        &self,
        traced: &mut TracedSession,
        choices: &[&str],
    ) -> Result<Vec<ClientMessage>, (u64, SessionError)> {
        let mut it = choices.iter();
        self.play(traced, |_, options| match it.next() {
            Some(c) => c.to_string(),
            None => options.first().map(|o| o.id.clone()).unwrap_or_default(),
        })
    }
}
