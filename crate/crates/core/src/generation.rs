//! Emotion generation from the identity/impression discrepancy.
//!
//! ```text
//! E = (impression.E - identity.E + 1) + (impression.A - identity.A) * delta
//! P = (impression.P - identity.P) - (impression.A - identity.A)
//! A =  impression.A + identity.A
//! ```
//!
//! The computation is stateless: the previous emotion plays no part.

use serde::{Deserialize, Serialize};

use crate::epa::{clamp_epa, EpaError, EpaVector};

/// The agent's fundamental affective meaning. Fixed for a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EpaVector", into = "EpaVector")]
pub struct Identity(EpaVector);

impl Identity {
    /// Out-of-range components are clamped; non-finite ones are rejected.
    pub fn new(value: EpaVector) -> Result<Self, EpaError> {
        Ok(Self(clamp_epa(value)?))
    }

    pub fn value(&self) -> EpaVector {
        self.0
    }
}

impl Default for Identity {
    /// A mildly good, slightly potent, calm companion. Impression equal to
    /// this identity yields the emotion (1, 0, 0), which labels Happiness.
    fn default() -> Self {
        Self(EpaVector::new(1.0, 0.5, 0.0))
    }
}

impl TryFrom<EpaVector> for Identity {
    type Error = EpaError;

    fn try_from(v: EpaVector) -> Result<Self, Self::Error> {
        Identity::new(v)
    }
}

impl From<Identity> for EpaVector {
    fn from(id: Identity) -> Self {
        id.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    /// Weight of the Activity discrepancy in the Evaluation of the emotion.
    pub delta: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { delta: 0.5 }
    }
}

/// Unclamped emotion. Useful for inspecting how far the equations overshoot.
pub fn generate_emotion_raw(
    identity: &Identity,
    impression: &EpaVector,
    params: &GenerationParams,
) -> Result<EpaVector, EpaError> {
    let id = identity.value();
    let imp = impression.ensure_finite()?;
    if !params.delta.is_finite() {
        return Err(EpaError::NonFinite(EpaVector::new(params.delta, 0.0, 0.0)));
    }
    let activity_gap = imp.a - id.a;
    let e = (imp.e - id.e + 1.0) + activity_gap * params.delta;
    let p = (imp.p - id.p) - activity_gap;
    let a = imp.a + id.a;
    Ok(EpaVector::new(e, p, a))
}

pub fn generate_emotion(
    identity: &Identity,
    impression: &EpaVector,
    params: &GenerationParams,
) -> Result<EpaVector, EpaError> {
    clamp_epa(generate_emotion_raw(identity, impression, params)?)
}
