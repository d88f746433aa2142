use std::io::Write;

use serde::Serialize;

use crate::epa::EmotionLabel;
use crate::impression::PerceptionKind;

use super::protocol::{ClientMessage, ServerMessage};
use super::trace::SessionTrace;

/// One row per accepted event. `cue_color` is the colour of the last cue the
/// event produced (empty when none) and `animations` joins every animation
/// it played with `|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportRow {
    pub seq: u64,
    pub t: u64,
    pub event: String,
    pub imp_e: f64,
    pub imp_p: f64,
    pub imp_a: f64,
    pub emo_e: f64,
    pub emo_p: f64,
    pub emo_a: f64,
    pub label: EmotionLabel,
    pub similarity: Option<f64>,
    pub cue_color: String,
    pub animations: String,
}

fn describe(event: &ClientMessage) -> (u64, String) {
    match event {
        ClientMessage::StartSession { t, .. } => (*t, "start_session".to_string()),
        ClientMessage::Choice { t, option, .. } => (*t, format!("choice:{option}")),
        ClientMessage::Tick { t, .. } => (*t, "tick".to_string()),
        ClientMessage::Perception { t, perception, .. } => {
            let kind = match perception {
                PerceptionKind::UserEmotion { .. } => "user_emotion",
                PerceptionKind::Gaze { .. } => "gaze",
                PerceptionKind::Proximity { .. } => "proximity",
            };
            (*t, format!("perception:{kind}"))
        }
    }
}

pub fn export_rows(trace: &SessionTrace) -> Vec<ExportRow> {
    trace
        .records
        .iter()
        .map(|r| {
            let (t, event) = describe(&r.event);
            let mut cue_color = String::new();
            let mut animations = Vec::new();
            for out in &r.outputs {
                if let ServerMessage::ExpressionCue {
                    eye_color,
                    animation,
                    ..
                } = out
                {
                    cue_color = eye_color.to_string();
                    animations.extend(animation.iter().map(|a| a.to_string()));
                }
            }
            ExportRow {
                seq: r.seq,
                t,
                event,
                imp_e: r.impression.value.e,
                imp_p: r.impression.value.p,
                imp_a: r.impression.value.a,
                emo_e: r.emotion.e,
                emo_p: r.emotion.p,
                emo_a: r.emotion.a,
                label: r.label,
                similarity: r.similarity,
                cue_color,
                animations: animations.join("|"),
            }
        })
        .collect()
}

/// Column names, in order.
pub const EXPORT_COLUMNS: [&str; 13] = [
    "seq",
    "t",
    "event",
    "imp_e",
    "imp_p",
    "imp_a",
    "emo_e",
    "emo_p",
    "emo_a",
    "label",
    "similarity",
    "cue_color",
    "animations",
];

pub fn export_csv<W: Write>(trace: &SessionTrace, w: W) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    writer.write_record(EXPORT_COLUMNS)?;
    for row in export_rows(trace) {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn export_jsonl<W: Write>(trace: &SessionTrace, mut w: W) -> std::io::Result<()> {
    for row in export_rows(trace) {
        let line = serde_json::to_string(&row).map_err(std::io::Error::other)?;
        writeln!(w, "{line}")?;
    }
    w.flush()
}
