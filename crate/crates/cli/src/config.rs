use std::path::Path;

use anyhow::{bail, Context, Result};
use octa_core::PipelineConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Fraction of each class used for training.
    pub split_ratio: f64,
    pub max_depth: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            split_ratio: 0.8,
            max_depth: 3,
        }
    }
}

/// Everything a run can be configured with besides the manifest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub classify: ClassifyConfig,
}

impl RunConfig {
    /// TOML for `.toml` files, JSON otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            _ => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        if !(0.0..=1.0).contains(&self.classify.split_ratio) {
            bail!("classify.split_ratio must be in [0, 1], got {}", self.classify.split_ratio);
        }
        if self.classify.max_depth == 0 {
            bail!("classify.max_depth must be at least 1");
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
