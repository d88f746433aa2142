use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epa::{EmotionCatalog, EpaVector};
use crate::expression::{AnimationCatalog, ColorMap, DisplayPolicy, ExpressionSettings};
use crate::generation::{GenerationParams, Identity};
use crate::impression::{ImpressionError, ImpressionGains};
use crate::pipeline::AffectPipeline;

/// Environment variable consulted when no `--config` is given.
pub const CONFIG_ENV: &str = "EMOACT_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Gains(#[from] ImpressionError),
    #[error("delta must be finite, got {0}")]
    Delta(f64),
}

/// Engine configuration. Every field has a default, so an empty file is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Default story id.
    pub story: String,
    pub seed: u64,
    pub identity: Identity,
    /// Starting impression; the identity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_impression: Option<EpaVector>,
    pub delta: f64,
    pub gains: ImpressionGains,
    pub catalog: EmotionCatalog,
    pub colors: ColorMap,
    pub animations: AnimationCatalog,
    pub policy: DisplayPolicy,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            story: "detective".to_string(),
            seed: 0,
            identity: Identity::default(),
            initial_impression: None,
            delta: GenerationParams::default().delta,
            gains: ImpressionGains::default(),
            catalog: EmotionCatalog::default(),
            colors: ColorMap::default(),
            animations: AnimationCatalog::default(),
            policy: DisplayPolicy::default(),
        }
    }
}

impl SessionConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SessionConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gains.validate()?;
        if !self.delta.is_finite() {
            return Err(ConfigError::Delta(self.delta));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> AffectPipeline {
        AffectPipeline {
            identity: self.identity,
            generation: GenerationParams { delta: self.delta },
            gains: self.gains,
            catalog: self.catalog.clone(),
        }
    }

    pub fn expression(&self) -> ExpressionSettings {
        ExpressionSettings {
            colors: self.colors.clone(),
            animations: self.animations.clone(),
            policy: self.policy,
        }
    }
}
