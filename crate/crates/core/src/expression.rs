//! Emotion expression: turning a label into eye colour and animation cues
//! under a display-frequency policy.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::EmotionLabel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpressionError {
    #[error("colour map has no entry for {0}")]
    MissingColor(EmotionLabel),
    #[error("animation catalog has no animations for {0}")]
    MissingAnimations(EmotionLabel),
    #[error("Neutral must not carry animations")]
    NeutralAnimations,
}

/// A colour name understood by the rendering side, e.g. `"DarkBlue"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EyeColor(pub String);

impl EyeColor {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EyeColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque animation identifier, e.g. `"Anger2"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnimationId(pub String);

impl AnimationId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AnimationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Label to eye colour. Total over all five labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<EmotionLabel, EyeColor>",
    into = "BTreeMap<EmotionLabel, EyeColor>"
)]
pub struct ColorMap(BTreeMap<EmotionLabel, EyeColor>);

impl ColorMap {
    pub fn new(map: BTreeMap<EmotionLabel, EyeColor>) -> Result<Self, ExpressionError> {
        if let Some(missing) = EmotionLabel::ALL.into_iter().find(|l| !map.contains_key(l)) {
            return Err(ExpressionError::MissingColor(missing));
        }
        Ok(Self(map))
    }

    pub fn get(&self, label: EmotionLabel) -> &EyeColor {
        // totality is checked at construction
        &self.0[&label]
    }
}

impl Default for ColorMap {
    fn default() -> Self {
        let map = [
            (EmotionLabel::Anger, "Red"),
            (EmotionLabel::Fear, "Black"),
            (EmotionLabel::Happiness, "Green"),
            (EmotionLabel::Sadness, "DarkBlue"),
            (EmotionLabel::Neutral, "White"),
        ]
        .into_iter()
        .map(|(l, c)| (l, EyeColor::new(c)))
        .collect();
        Self(map)
    }
}

impl TryFrom<BTreeMap<EmotionLabel, EyeColor>> for ColorMap {
    type Error = ExpressionError;

    fn try_from(map: BTreeMap<EmotionLabel, EyeColor>) -> Result<Self, Self::Error> {
        ColorMap::new(map)
    }
}

impl From<ColorMap> for BTreeMap<EmotionLabel, EyeColor> {
    fn from(m: ColorMap) -> Self {
        m.0
    }
}

pub fn eye_color(label: EmotionLabel, map: &ColorMap) -> &EyeColor {
    map.get(label)
}

/// Animations available for each basic emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<EmotionLabel, Vec<AnimationId>>",
    into = "BTreeMap<EmotionLabel, Vec<AnimationId>>"
)]
pub struct AnimationCatalog(BTreeMap<EmotionLabel, Vec<AnimationId>>);

impl AnimationCatalog {
    pub fn new(map: BTreeMap<EmotionLabel, Vec<AnimationId>>) -> Result<Self, ExpressionError> {
        if map.contains_key(&EmotionLabel::Neutral) {
            return Err(ExpressionError::NeutralAnimations);
        }
        for label in EmotionLabel::BASIC {
            if map.get(&label).is_none_or(|v| v.is_empty()) {
                return Err(ExpressionError::MissingAnimations(label));
            }
        }
        Ok(Self(map))
    }

    /// Empty for Neutral.
    pub fn animations(&self, label: EmotionLabel) -> &[AnimationId] {
        self.0.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for AnimationCatalog {
    fn default() -> Self {
        let ids = |names: [&str; 2]| names.into_iter().map(AnimationId::new).collect::<Vec<_>>();
        Self(BTreeMap::from([
            (EmotionLabel::Anger, ids(["Anger2", "Anger4"])),
            (EmotionLabel::Fear, ids(["Fear1", "Fear2"])),
            (EmotionLabel::Happiness, ids(["Happy1", "Happy2"])),
            (EmotionLabel::Sadness, ids(["Sad1", "Sad2"])),
        ]))
    }
}

impl TryFrom<BTreeMap<EmotionLabel, Vec<AnimationId>>> for AnimationCatalog {
    type Error = ExpressionError;

    fn try_from(map: BTreeMap<EmotionLabel, Vec<AnimationId>>) -> Result<Self, Self::Error> {
        AnimationCatalog::new(map)
    }
}

impl From<AnimationCatalog> for BTreeMap<EmotionLabel, Vec<AnimationId>> {
    fn from(c: AnimationCatalog) -> Self {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplayMode {
    /// Cues only after the user makes a choice.
    #[default]
    #[serde(alias = "low")]
    LowFrequency,
    /// Cues with every spoken sentence, animations rate-limited by a cooldown.
    #[serde(alias = "high")]
    HighFrequency,
}

impl std::str::FromStr for DisplayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" | "low_frequency" => Ok(DisplayMode::LowFrequency),
            "high" | "high_frequency" => Ok(DisplayMode::HighFrequency),
            other => Err(format!(
                "unknown display policy `{other}` (expected low or high)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisplayPolicy {
    pub mode: DisplayMode,
    /// Minimum logical time between two animations (HighFrequency only).
    pub animation_cooldown_ms: u64,
}

impl Default for DisplayPolicy {
    fn default() -> Self {
        Self {
            mode: DisplayMode::LowFrequency,
            animation_cooldown_ms: 30_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    SentenceSpoken,
    ChoiceMade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionCue {
    pub label: EmotionLabel,
    pub eye_color: EyeColor,
    pub animation: Option<AnimationId>,
    pub trigger: Trigger,
    pub timestamp_ms: u64,
}

/// Everything cue selection needs besides the running state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExpressionSettings {
    pub colors: ColorMap,
    pub animations: AnimationCatalog,
    pub policy: DisplayPolicy,
}

/// Seeded animation chooser: uniform over the label's animations, never
/// repeating the one used last time for that label.
#[derive(Debug, Clone)]
pub struct AnimationPicker {
    rng: ChaCha8Rng,
    last: BTreeMap<EmotionLabel, AnimationId>,
}

impl AnimationPicker {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: BTreeMap::new(),
        }
    }

    pub fn pick(&mut self, label: EmotionLabel, catalog: &AnimationCatalog) -> Option<AnimationId> {
        let all = catalog.animations(label);
        let candidates: Vec<&AnimationId> = match (all.len(), self.last.get(&label)) {
            (0, _) => return None,
            (1, _) | (_, None) => all.iter().collect(),
            (_, Some(prev)) => all.iter().filter(|a| *a != prev).collect(),
        };
        // a catalog of duplicates can filter down to nothing
        let pool = if candidates.is_empty() {
            all.iter().collect()
        } else {
            candidates
        };
        let choice = pool[self.rng.gen_range(0..pool.len())].clone();
        self.last.insert(label, choice.clone());
        Some(choice)
    }
}

/// Decide whether (and how) to express `label` at `now_ms`.
///
/// Returns `None` when the policy emits nothing for this trigger. The caller
/// records the cue's timestamp as the new `last_animation_ms` whenever the
/// returned cue carries an animation.
pub fn select_cues(
    label: EmotionLabel,
    trigger: Trigger,
    now_ms: u64,
    last_animation_ms: Option<u64>,
    settings: &ExpressionSettings,
    picker: &mut AnimationPicker,
) -> Option<ExpressionCue> {
    let policy = &settings.policy;
    let animate = match (policy.mode, trigger) {
        (DisplayMode::LowFrequency, Trigger::SentenceSpoken) => return None,
        (DisplayMode::LowFrequency, Trigger::ChoiceMade) => true,
        (DisplayMode::HighFrequency, _) => last_animation_ms
            .is_none_or(|last| now_ms.saturating_sub(last) >= policy.animation_cooldown_ms),
    };
    let animation = if animate && label != EmotionLabel::Neutral {
        picker.pick(label, &settings.animations)
    } else {
        None
    };
    Some(ExpressionCue {
        label,
        eye_color: eye_color(label, &settings.colors).clone(),
        animation,
        trigger,
        timestamp_ms: now_ms,
    })
}
