//! Emotion engine for a storytelling robot grounded in Affect Control Theory.
//!
//! The crate turns perceived user behaviour and story choices into an EPA
//! impression of the user, generates the agent's emotion from that
//! impression and its own identity, labels the emotion against a reference
//! catalog, and maps the label to eye-colour and animation cues. The
//! [`session`] layer runs branching stories on top of that pipeline and
//! records replayable traces.
//!
//! ```
//! use emoact::epa::{label_emotion, EmotionCatalog, EmotionLabel, EpaVector};
//!
//! let labeling = label_emotion(&EpaVector::new(1.0, 0.0, 2.0), &EmotionCatalog::default()).unwrap();
//! assert_eq!(labeling.label, EmotionLabel::Anger);
//! ```

pub mod cli;
pub mod epa;
pub mod expression;
pub mod generation;
pub mod impression;
pub mod pipeline;
pub mod server;
pub mod session;
pub mod story;

pub use epa::{EmotionLabel, EpaVector};
pub use pipeline::AffectPipeline;
