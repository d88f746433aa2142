use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::{EpaError, EpaVector, Labeling};
use crate::expression::{select_cues, AnimationPicker, ExpressionSettings, Trigger};
use crate::impression::{
    apply_choice, apply_perception, ExpectedSigns, Impression, ImpressionError, PerceptionKind,
};
use crate::pipeline::AffectPipeline;
use crate::story::{advance, NodeId, NodeKind, StoryError, StoryGraph};

use super::config::{ConfigError, SessionConfig};
use super::protocol::{ClientMessage, OptionView, ServerMessage};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("expected event seq {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("timestamp {got} ms is earlier than the previous event at {last} ms")]
    TimeRegression { last: u64, got: u64 },
    #[error("session has not started")]
    NotStarted,
    #[error("session already started")]
    AlreadyStarted,
    #[error("no decision is pending")]
    NoPendingDecision,
    #[error(transparent)]
    Story(#[from] StoryError),
    #[error(transparent)]
    Impression(#[from] ImpressionError),
    #[error(transparent)]
    Epa(#[from] EpaError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl SessionError {
    /// Stable machine-readable code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::OutOfOrder { .. } => "out_of_order",
            SessionError::TimeRegression { .. } => "time_regression",
            SessionError::NotStarted => "not_started",
            SessionError::AlreadyStarted => "already_started",
            SessionError::NoPendingDecision => "no_pending_decision",
            SessionError::Story(StoryError::UnknownOption { .. }) => "unknown_option",
            SessionError::Story(_) => "story",
            SessionError::Impression(_) => "invalid_perception",
            SessionError::Epa(_) => "invalid_value",
            SessionError::Config(_) => "config",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventPayload {
    Start,
    Perception(PerceptionKind),
    Choice(String),
    Tick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub payload: EventPayload,
}

impl From<&ClientMessage> for SessionEvent {
    fn from(msg: &ClientMessage) -> Self {
        let (seq, timestamp_ms, payload) = match msg {
            ClientMessage::StartSession { seq, t, .. } => (*seq, *t, EventPayload::Start),
            ClientMessage::Choice { seq, t, option } => {
                (*seq, *t, EventPayload::Choice(option.clone()))
            }
            ClientMessage::Perception { seq, t, perception } => {
                (*seq, *t, EventPayload::Perception(*perception))
            }
            ClientMessage::Tick { seq, t } => (*seq, *t, EventPayload::Tick),
        };
        SessionEvent {
            seq,
            timestamp_ms,
            payload,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    NotStarted,
    Narrating,
    AwaitingChoice,
    Finished,
}

/// Post-event affective state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub impression: Impression,
    pub emotion: EpaVector,
    pub labeling: Labeling,
}

/// One story playthrough.
///
/// Events are applied strictly in `seq` order with non-decreasing logical
/// timestamps. A rejected event leaves the session untouched.
///
/// Narration is paced by the event stream: `Start` and `Choice` speak the
/// first sentence of the node they enter, and each `Tick` speaks the next
/// one. Once a decision node's narration is exhausted a `decision_request`
/// is emitted.
#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    story: Arc<StoryGraph>,
    pipeline: AffectPipeline,
    expression: ExpressionSettings,
    picker: AnimationPicker,
    phase: Phase,
    cursor: NodeId,
    pending: VecDeque<String>,
    snapshot: Snapshot,
    next_seq: u64,
    last_t: Option<u64>,
    last_animation_ms: Option<u64>,
}

impl Session {
    pub fn new(config: SessionConfig, story: Arc<StoryGraph>) -> Result<Self, SessionError> {
        config.validate()?;
        let mut config = config;
        config.story = story.id.clone();
        let pipeline = config.pipeline();
        let impression = Impression::new(
            config
                .initial_impression
                .unwrap_or(pipeline.identity.value()),
        )?;
        let appraisal = pipeline.appraise(&impression.value)?;
        Ok(Self {
            expression: config.expression(),
            picker: AnimationPicker::new(config.seed),
            cursor: story.start.clone(),
            phase: Phase::NotStarted,
            pending: VecDeque::new(),
            snapshot: Snapshot {
                impression,
                emotion: appraisal.emotion,
                labeling: appraisal.labeling,
            },
            next_seq: 0,
            last_t: None,
            last_animation_ms: None,
            pipeline,
            story,
            config,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn story(&self) -> &Arc<StoryGraph> {
        &self.story
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn cursor(&self) -> &NodeId {
        &self.cursor
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.last_t
    }

    /// Apply one event. On error the session is unchanged.
    pub fn handle_event(
        &mut self,
        event: &SessionEvent,
    ) -> Result<Vec<ServerMessage>, SessionError> {
        let mut next = self.clone();
        let out = next.apply(event)?;
        *self = next;
        Ok(out)
    }

    fn apply(&mut self, event: &SessionEvent) -> Result<Vec<ServerMessage>, SessionError> {
        if event.seq != self.next_seq {
            return Err(SessionError::OutOfOrder {
                expected: self.next_seq,
                got: event.seq,
            });
        }
        if let Some(last) = self.last_t.filter(|&l| event.timestamp_ms < l) {
            return Err(SessionError::TimeRegression {
                last,
                got: event.timestamp_ms,
            });
        }
        let mut ctx = Emitter {
            seq: event.seq,
            t: event.timestamp_ms,
            out: Vec::new(),
        };
        match &event.payload {
            EventPayload::Start => self.on_start(&mut ctx)?,
            EventPayload::Perception(kind) => self.on_perception(kind, &mut ctx)?,
            EventPayload::Choice(option) => self.on_choice(option, &mut ctx)?,
            EventPayload::Tick => self.on_tick(&mut ctx)?,
        }
        self.next_seq += 1;
        self.last_t = Some(event.timestamp_ms);
        Ok(ctx.out)
    }

    fn on_start(&mut self, ctx: &mut Emitter) -> Result<(), SessionError> {
        if self.phase != Phase::NotStarted {
            return Err(SessionError::AlreadyStarted);
        }
        self.phase = Phase::Narrating;
        let start = self.story.start.clone();
        self.enter(start, ctx, false)?;
        ctx.push(self.state_update(ctx));
        self.speak(ctx)
    }

    fn on_perception(
        &mut self,
        kind: &PerceptionKind,
        ctx: &mut Emitter,
    ) -> Result<(), SessionError> {
        if self.phase == Phase::NotStarted {
            return Err(SessionError::NotStarted);
        }
        let imp = apply_perception(&self.snapshot.impression, kind, &self.pipeline.gains)?;
        self.set_impression(imp)?;
        ctx.push(self.state_update(ctx));
        Ok(())
    }

    fn on_choice(&mut self, option: &str, ctx: &mut Emitter) -> Result<(), SessionError> {
        match self.phase {
            Phase::NotStarted => return Err(SessionError::NotStarted),
            Phase::AwaitingChoice => {}
            Phase::Narrating | Phase::Finished => return Err(SessionError::NoPendingDecision),
        }
        let step = advance(&self.story, &self.cursor, Some(option))?;
        if let Some(signs) = step.expected {
            self.apply_signs(&signs)?;
        }
        self.phase = Phase::Narrating;
        if let Some(next) = step.next {
            self.enter(next, ctx, false)?;
        }
        ctx.push(self.state_update(ctx));
        self.cue(Trigger::ChoiceMade, ctx);
        self.speak(ctx)
    }

    fn on_tick(&mut self, ctx: &mut Emitter) -> Result<(), SessionError> {
        match self.phase {
            Phase::NotStarted => Err(SessionError::NotStarted),
            Phase::Narrating => self.speak(ctx),
            Phase::AwaitingChoice | Phase::Finished => Ok(()),
        }
    }

    /// Move the cursor onto `id`, queue its narration and apply its forced
    /// outcome. A node without narration is resolved immediately.
    fn enter(&mut self, id: NodeId, ctx: &mut Emitter, announce: bool) -> Result<(), SessionError> {
        let node = self.story.expect_node(&id)?;
        self.pending = node.narration.iter().cloned().collect();
        let forced = node.forced().map(|f| f.expected);
        self.cursor = id;
        if let Some(signs) = forced {
            self.apply_signs(&signs)?;
            if announce {
                ctx.push(self.state_update(ctx));
            }
        }
        if self.pending.is_empty() {
            self.resolve_node(ctx)?;
        }
        Ok(())
    }

    /// Speak one queued sentence, then resolve the node if that was the last.
    fn speak(&mut self, ctx: &mut Emitter) -> Result<(), SessionError> {
        let Some(text) = self.pending.pop_front() else {
            return Ok(());
        };
        ctx.push(ServerMessage::Narration {
            seq: ctx.seq,
            t: ctx.t,
            node: self.cursor.to_string(),
            text,
        });
        self.cue(Trigger::SentenceSpoken, ctx);
        if self.pending.is_empty() {
            self.resolve_node(ctx)?;
        }
        Ok(())
    }

    fn resolve_node(&mut self, ctx: &mut Emitter) -> Result<(), SessionError> {
        let story = Arc::clone(&self.story);
        let node = story.expect_node(&self.cursor)?;
        match &node.kind {
            NodeKind::Decision { prompt, options } => {
                self.phase = Phase::AwaitingChoice;
                ctx.push(ServerMessage::DecisionRequest {
                    seq: ctx.seq,
                    t: ctx.t,
                    node: node.id.to_string(),
                    prompt: prompt.clone(),
                    options: options
                        .iter()
                        .map(|o| OptionView {
                            id: o.id.clone(),
                            text: o.text.clone(),
                        })
                        .collect(),
                });
                Ok(())
            }
            NodeKind::Linear { next, .. } => self.enter(next.clone(), ctx, true),
            NodeKind::Terminal => {
                self.phase = Phase::Finished;
                ctx.push(self.state_update(ctx));
                Ok(())
            }
        }
    }

    fn apply_signs(&mut self, signs: &ExpectedSigns) -> Result<(), SessionError> {
        let imp = apply_choice(&self.snapshot.impression, signs, &self.pipeline.gains)?;
        self.set_impression(imp)
    }

    fn set_impression(&mut self, impression: Impression) -> Result<(), SessionError> {
        let appraisal = self.pipeline.appraise(&impression.value)?;
        self.snapshot = Snapshot {
            impression,
            emotion: appraisal.emotion,
            labeling: appraisal.labeling,
        };
        Ok(())
    }

    fn cue(&mut self, trigger: Trigger, ctx: &mut Emitter) {
        let cue = select_cues(
            self.snapshot.labeling.label,
            trigger,
            ctx.t,
            self.last_animation_ms,
            &self.expression,
            &mut self.picker,
        );
        if let Some(cue) = cue {
            if cue.animation.is_some() {
                self.last_animation_ms = Some(cue.timestamp_ms);
            }
            ctx.push(ServerMessage::ExpressionCue {
                seq: ctx.seq,
                t: cue.timestamp_ms,
                label: cue.label,
                eye_color: cue.eye_color,
                animation: cue.animation,
                trigger: cue.trigger,
            });
        }
    }

    fn state_update(&self, ctx: &Emitter) -> ServerMessage {
        ServerMessage::StateUpdate {
            seq: ctx.seq,
            t: ctx.t,
            session_id: None,
            impression: self.snapshot.impression.value,
            emotion: self.snapshot.emotion,
            label: self.snapshot.labeling.label,
            similarity: self.snapshot.labeling.similarity,
            node: self.cursor.to_string(),
            finished: self.phase == Phase::Finished,
        }
    }
}

struct Emitter {
    seq: u64,
    t: u64,
    out: Vec<ServerMessage>,
}

impl Emitter {
    fn push(&mut self, msg: ServerMessage) {
        self.out.push(msg);
    }
}
