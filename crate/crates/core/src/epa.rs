//! Evaluation / Potency / Activity space.
//!
//! Every affective quantity in the engine (identity, impression, emotion) is
//! a point in EPA space. Pipeline-facing values are kept inside the
//! `[-4, +4]` cube; raw intermediate results may leave it and are brought
//! back with [`clamp_epa`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower bound of every EPA axis.
pub const EPA_MIN: f64 = -4.0;
/// Upper bound of every EPA axis.
pub const EPA_MAX: f64 = 4.0;

/// Default similarity threshold for labeling.
pub const DEFAULT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpaError {
    #[error("non-finite EPA component in {0}")]
    NonFinite(EpaVector),
    #[error("cosine similarity is undefined for a zero-magnitude vector")]
    ZeroMagnitude,
    #[error("invalid emotion catalog: {0}")]
    InvalidCatalog(String),
}

/// A point in EPA space.
///
/// Serialized as a three-element array `[e, p, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct EpaVector {
    pub e: f64,
    pub p: f64,
    pub a: f64,
}

impl EpaVector {
    pub const ZERO: EpaVector = EpaVector::new(0.0, 0.0, 0.0);

    pub const fn new(e: f64, p: f64, a: f64) -> Self {
        Self { e, p, a }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.e, self.p, self.a]
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.p.is_finite() && self.a.is_finite()
    }

    pub fn dot(&self, other: &EpaVector) -> f64 {
        self.e * other.e + self.p * other.p + self.a * other.a
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> EpaVector {
        EpaVector::new(self.e * k, self.p * k, self.a * k)
    }

    /// True when every component lies in `[-4, +4]`.
    pub fn in_range(&self) -> bool {
        self.components()
            .iter()
            .all(|c| (EPA_MIN..=EPA_MAX).contains(c))
    }

    pub(crate) fn ensure_finite(self) -> Result<Self, EpaError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(EpaError::NonFinite(self))
        }
    }
}

impl std::ops::Add for EpaVector {
    type Output = EpaVector;

    fn add(self, rhs: EpaVector) -> EpaVector {
        EpaVector::new(self.e + rhs.e, self.p + rhs.p, self.a + rhs.a)
    }
}

impl std::ops::Sub for EpaVector {
    type Output = EpaVector;

    fn sub(self, rhs: EpaVector) -> EpaVector {
        EpaVector::new(self.e - rhs.e, self.p - rhs.p, self.a - rhs.a)
    }
}

impl From<[f64; 3]> for EpaVector {
    fn from([e, p, a]: [f64; 3]) -> Self {
        EpaVector::new(e, p, a)
    }
}

impl From<EpaVector> for [f64; 3] {
    fn from(v: EpaVector) -> Self {
        v.components()
    }
}

impl fmt::Display for EpaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.e, self.p, self.a)
    }
}

/// Clip each component into `[-4, +4]`.
pub fn clamp_epa(v: EpaVector) -> Result<EpaVector, EpaError> {
    let v = v.ensure_finite()?;
    Ok(EpaVector::new(
        v.e.clamp(EPA_MIN, EPA_MAX),
        v.p.clamp(EPA_MIN, EPA_MAX),
        v.a.clamp(EPA_MIN, EPA_MAX),
    ))
}

/// `dot(u, v) / (|u| |v|)`.
///
/// Returns [`EpaError::ZeroMagnitude`] when either argument is the origin.
pub fn cosine_similarity(u: &EpaVector, v: &EpaVector) -> Result<f64, EpaError> {
    let u = u.ensure_finite()?;
    let v = v.ensure_finite()?;
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return Err(EpaError::ZeroMagnitude);
    }
    // Rounding can push |cos| a hair past 1 for parallel vectors.
    Ok((u.dot(&v) / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmotionLabel {
    Anger,
    Fear,
    Happiness,
    Sadness,
    Neutral,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 5] = [
        EmotionLabel::Anger,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
        EmotionLabel::Neutral,
    ];

    /// The four labels that carry a reference vector, in catalog order.
    pub const BASIC: [EmotionLabel; 4] = [
        EmotionLabel::Anger,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EmotionLabel::Anger => "Anger",
            EmotionLabel::Fear => "Fear",
            EmotionLabel::Happiness => "Happiness",
            EmotionLabel::Sadness => "Sadness",
            EmotionLabel::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown emotion label `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: EmotionLabel,
    pub epa: EpaVector,
}

/// Reference vectors of the four basic emotions plus the acceptance threshold.
///
/// Entry order is fixed (Anger, Fear, Happiness, Sadness) and doubles as the
/// tie-break order when two similarities are exactly equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCatalog", into = "RawCatalog")]
pub struct EmotionCatalog {
    entries: [CatalogEntry; 4],
    threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCatalog {
    threshold: f64,
    entries: Vec<CatalogEntry>,
}

impl TryFrom<RawCatalog> for EmotionCatalog {
    type Error = EpaError;

    fn try_from(raw: RawCatalog) -> Result<Self, Self::Error> {
        EmotionCatalog::new(raw.entries, raw.threshold)
    }
}

impl From<EmotionCatalog> for RawCatalog {
    fn from(c: EmotionCatalog) -> Self {
        RawCatalog {
            threshold: c.threshold,
            entries: c.entries.to_vec(),
        }
    }
}

impl EmotionCatalog {
    pub fn new(entries: Vec<CatalogEntry>, threshold: f64) -> Result<Self, EpaError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(EpaError::InvalidCatalog(format!(
                "threshold {threshold} outside (0, 1]"
            )));
        }
        let entries: [CatalogEntry; 4] = entries.try_into().map_err(|v: Vec<_>| {
            EpaError::InvalidCatalog(format!("expected 4 entries, got {}", v.len()))
        })?;
        for (entry, expected) in entries.iter().zip(EmotionLabel::BASIC) {
            if entry.label != expected {
                return Err(EpaError::InvalidCatalog(format!(
                    "entry order must be Anger, Fear, Happiness, Sadness; found {} where {} belongs",
                    entry.label, expected
                )));
            }
            if !entry.epa.is_finite() || entry.epa.norm() == 0.0 {
                return Err(EpaError::InvalidCatalog(format!(
                    "{} reference must be finite and non-zero",
                    entry.label
                )));
            }
        }
        Ok(Self { entries, threshold })
    }

    pub fn entries(&self) -> &[CatalogEntry; 4] {
        &self.entries
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self, EpaError> {
        EmotionCatalog::new(self.entries.to_vec(), threshold)
    }

    pub fn reference(&self, label: EmotionLabel) -> Option<EpaVector> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.epa)
    }
}

impl Default for EmotionCatalog {
    fn default() -> Self {
        let entry = |label, e, p, a| CatalogEntry {
            label,
            epa: EpaVector::new(e, p, a),
        };
        Self {
            entries: [
                entry(EmotionLabel::Anger, 1.95, 1.34, 1.78),
                entry(EmotionLabel::Fear, -2.04, -0.94, -0.70),
                entry(EmotionLabel::Happiness, 3.54, 2.53, 1.28),
                entry(EmotionLabel::Sadness, -2.52, -2.29, -2.21),
            ],
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Result of [`label_emotion`]. `similarity` is `None` exactly when the label
/// is the Neutral fallback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    pub label: EmotionLabel,
    pub similarity: Option<f64>,
}

impl Labeling {
    pub const NEUTRAL: Labeling = Labeling {
        label: EmotionLabel::Neutral,
        similarity: None,
    };
}

/// Map an emotion vector onto the closest basic emotion by cosine similarity.
///
/// The best match is accepted when its similarity is at least the catalog
/// threshold; otherwise, and for the zero vector, the result is Neutral.
pub fn label_emotion(emotion: &EpaVector, catalog: &EmotionCatalog) -> Result<Labeling, EpaError> {
    let emotion = emotion.ensure_finite()?;
    if emotion.norm() == 0.0 {
        return Ok(Labeling::NEUTRAL);
    }
    let mut best: Option<(EmotionLabel, f64)> = None;
    for entry in catalog.entries() {
        let sim = cosine_similarity(&emotion, &entry.epa)?;
        // strict `>` keeps the earlier entry on ties
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((entry.label, sim));
        }
    }
    Ok(match best {
        Some((label, sim)) if sim >= catalog.threshold() => Labeling {
            label,
            similarity: Some(sim),
        },
        _ => Labeling::NEUTRAL,
    })
}
