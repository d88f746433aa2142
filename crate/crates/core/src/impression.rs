//! Impression detection: how the user currently perceives the agent.
//!
//! The impression starts at the agent's identity and is nudged by perception
//! cues (user emotion, gaze, proximity) and by story choices. Every update
//! returns a new [`Impression`] clamped to the EPA cube.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::{clamp_epa, EpaError, EpaVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImpressionError {
    #[error("valence {0} outside [-1, 1]")]
    ValenceOutOfRange(f64),
    #[error("distance {0} m must be finite and non-negative")]
    InvalidDistance(f64),
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error(transparent)]
    Epa(#[from] EpaError),
}

/// Estimated impression plus the perception memory the delta rules need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impression {
    pub value: EpaVector,
    pub last_valence: Option<f64>,
    pub last_distance_m: Option<f64>,
    pub gaze_on_agent: Option<bool>,
}

impl Impression {
    /// Fresh impression with no perception history.
    pub fn new(value: EpaVector) -> Result<Self, ImpressionError> {
        Ok(Self {
            value: clamp_epa(value)?,
            last_valence: None,
            last_distance_m: None,
            gaze_on_agent: None,
        })
    }
}

/// Magnitudes for the perception and choice rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpressionGains {
    /// Evaluation change per unit of valence change.
    pub k_valence: f64,
    /// Attribution multiplier while the user looks at the agent.
    pub gaze_attrib_on: f64,
    /// Attribution multiplier while the user looks away.
    pub gaze_attrib_off: f64,
    pub k_gaze_potency: f64,
    /// Evaluation and Activity change per meter of approach.
    pub k_proximity: f64,
    pub choice_step: f64,
    pub choice_base: f64,
}

impl Default for ImpressionGains {
    fn default() -> Self {
        Self {
            k_valence: 0.5,
            gaze_attrib_on: 1.0,
            gaze_attrib_off: -0.5,
            k_gaze_potency: 0.1,
            k_proximity: 0.3,
            choice_step: 0.5,
            choice_base: 1.0,
        }
    }
}

impl ImpressionGains {
    pub fn validate(&self) -> Result<(), ImpressionError> {
        let all = [
            ("k_valence", self.k_valence, true),
            ("gaze_attrib_on", self.gaze_attrib_on, false),
            ("gaze_attrib_off", self.gaze_attrib_off, false),
            ("k_gaze_potency", self.k_gaze_potency, true),
            ("k_proximity", self.k_proximity, true),
            ("choice_step", self.choice_step, true),
            ("choice_base", self.choice_base, true),
        ];
        for (name, value, non_negative) in all {
            if !value.is_finite() || (non_negative && value < 0.0) {
                return Err(ImpressionError::InvalidGains(format!("{name} = {value}")));
            }
        }
        Ok(())
    }
}

/// -1, 0 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Negative,
    #[default]
    Zero,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    /// `matches(0.0)` is true for every sign: increments start from the origin.
    fn matches(self, value: f64) -> bool {
        match self {
            Sign::Zero => true,
            Sign::Positive => value >= 0.0,
            Sign::Negative => value <= 0.0,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Sign::Negative),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Positive),
            other => Err(format!("sign must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Expected direction of the impression for a story choice, per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "[Sign; 3]", into = "[Sign; 3]")]
pub struct ExpectedSigns {
    pub e: Sign,
    pub p: Sign,
    pub a: Sign,
}

impl ExpectedSigns {
    pub const fn new(e: Sign, p: Sign, a: Sign) -> Self {
        Self { e, p, a }
    }

    /// Build from integer signs; panics on values other than -1/0/1.
    pub fn from_ints(e: i8, p: i8, a: i8) -> Self {
        let s = |v: i8| Sign::try_from(v).expect("sign must be -1, 0 or 1");
        Self::new(s(e), s(p), s(a))
    }
}

impl From<[Sign; 3]> for ExpectedSigns {
    fn from([e, p, a]: [Sign; 3]) -> Self {
        Self { e, p, a }
    }
}

impl From<ExpectedSigns> for [Sign; 3] {
    fn from(s: ExpectedSigns) -> Self {
        [s.e, s.p, s.a]
    }
}

/// What the perception layer reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerceptionKind {
    UserEmotion { valence: f64 },
    Gaze { on_agent: bool },
    Proximity { distance_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptionEvent {
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub kind: PerceptionKind,
}

fn shifted(value: EpaVector, delta: EpaVector) -> Result<EpaVector, ImpressionError> {
    Ok(clamp_epa(value + delta)?)
}

/// Evaluation moves with the change in the user's valence, scaled by who the
/// change is attributed to (the agent when gazed at, external causes otherwise).
pub fn apply_user_emotion(
    imp: &Impression,
    valence: f64,
    gains: &ImpressionGains,
) -> Result<Impression, ImpressionError> {
    if !(-1.0..=1.0).contains(&valence) {
        return Err(ImpressionError::ValenceOutOfRange(valence));
    }
    let delta_valence = valence - imp.last_valence.unwrap_or(0.0);
    let attribution = match imp.gaze_on_agent {
        Some(false) => gains.gaze_attrib_off,
        Some(true) | None => gains.gaze_attrib_on,
    };
    let delta_e = gains.k_valence * delta_valence * attribution;
    Ok(Impression {
        value: shifted(imp.value, EpaVector::new(delta_e, 0.0, 0.0))?,
        last_valence: Some(valence),
        ..*imp
    })
}

/// Holding the user's attention reads as potency; losing it as the opposite.
pub fn apply_gaze(
    imp: &Impression,
    on_agent: bool,
    gains: &ImpressionGains,
) -> Result<Impression, ImpressionError> {
    let delta_p = if on_agent {
        gains.k_gaze_potency
    } else {
        -gains.k_gaze_potency
    };
    Ok(Impression {
        value: shifted(imp.value, EpaVector::new(0.0, delta_p, 0.0))?,
        gaze_on_agent: Some(on_agent),
        ..*imp
    })
}

/// Approaching raises Evaluation and Activity, backing away lowers both.
/// The first observation only seeds the memory.
pub fn apply_proximity(
    imp: &Impression,
    distance_m: f64,
    gains: &ImpressionGains,
) -> Result<Impression, ImpressionError> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(ImpressionError::InvalidDistance(distance_m));
    }
    let approach = imp.last_distance_m.unwrap_or(distance_m) - distance_m;
    let delta = gains.k_proximity * approach;
    Ok(Impression {
        value: shifted(imp.value, EpaVector::new(delta, 0.0, delta))?,
        last_distance_m: Some(distance_m),
        ..*imp
    })
}

/// Story choice rule. Per axis with a non-zero expected sign: if the current
/// value already has that sign (or is zero) it is pushed further by
/// `choice_step`; otherwise it snaps to `sign * choice_base`.
pub fn apply_choice(
    imp: &Impression,
    expected: &ExpectedSigns,
    gains: &ImpressionGains,
) -> Result<Impression, ImpressionError> {
    let axis = |value: f64, sign: Sign| -> f64 {
        match sign {
            Sign::Zero => value,
            s if s.matches(value) => value + s.as_f64() * gains.choice_step,
            s => s.as_f64() * gains.choice_base,
        }
    };
    let v = imp.value;
    let next = EpaVector::new(
        axis(v.e, expected.e),
        axis(v.p, expected.p),
        axis(v.a, expected.a),
    );
    Ok(Impression {
        value: clamp_epa(next)?,
        ..*imp
    })
}

/// Route a perception event to the matching rule.
pub fn apply_perception(
    imp: &Impression,
    kind: &PerceptionKind,
    gains: &ImpressionGains,
) -> Result<Impression, ImpressionError> {
    match *kind {
        PerceptionKind::UserEmotion { valence } => apply_user_emotion(imp, valence, gains),
        PerceptionKind::Gaze { on_agent } => apply_gaze(imp, on_agent, gains),
        PerceptionKind::Proximity { distance_m } => apply_proximity(imp, distance_m, gains),
    }
}
