//! Impression → emotion → label, bundled with the parameters it needs.

use serde::{Deserialize, Serialize};

use crate::epa::{label_emotion, EmotionCatalog, EpaError, EpaVector, Labeling};
use crate::generation::{generate_emotion, GenerationParams, Identity};
use crate::impression::{
    apply_choice, ExpectedSigns, Impression, ImpressionError, ImpressionGains,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffectPipeline {
    pub identity: Identity,
    pub generation: GenerationParams,
    pub gains: ImpressionGains,
    pub catalog: EmotionCatalog,
}

/// Emotion and its label for one impression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Appraisal {
    pub emotion: EpaVector,
    pub labeling: Labeling,
}

impl AffectPipeline {
    pub fn appraise(&self, impression: &EpaVector) -> Result<Appraisal, EpaError> {
        let emotion = generate_emotion(&self.identity, impression, &self.generation)?;
        let labeling = label_emotion(&emotion, &self.catalog)?;
        Ok(Appraisal { emotion, labeling })
    }

    /// Impression equal to the identity, with no perception history.
    pub fn baseline_impression(&self) -> Impression {
        Impression {
            value: self.identity.value(),
            last_valence: None,
            last_distance_m: None,
            gaze_on_agent: None,
        }
    }

    /// Apply one set of expected signs to the identity-initialized impression
    /// and label the result. This is the authoring check for story options.
    pub fn label_for_signs(&self, signs: &ExpectedSigns) -> Result<Appraisal, ImpressionError> {
        let imp = apply_choice(&self.baseline_impression(), signs, &self.gains)?;
        Ok(self.appraise(&imp.value)?)
    }
}
