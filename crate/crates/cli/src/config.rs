//! The TOML run configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use readtime::estimators::EstimatorKind;
use readtime::neural::TrainConfig;
use readtime::simulator::SimConfig;
use serde::{Deserialize, Serialize};

use crate::ingest::IngestConfig;

/// Written into every output directory.
pub const RESOLVED_CONFIG: &str = "resolved-config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed. It replaces `simulation.seed` and `train.seed` and also
    /// seeds the validation split.
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub paths: Paths,
    pub cv: CvConfig,
    pub train: TrainConfig,
    pub simulation: SimConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            estimators: EstimatorKind::ALL.to_vec(),
            paths: Paths::default(),
            cv: CvConfig::default(),
            train: TrainConfig::default(),
            simulation: SimConfig::default(),
            ingest: None,
        }
    }
}

/// Default locations of each stage's artifacts; command-line flags override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub corpus: PathBuf,
    pub features: PathBuf,
    pub models: PathBuf,
    pub evaluation: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        let out = PathBuf::from("out");
        Self {
            corpus: out.join("corpus"),
            features: out.join("features"),
            models: out.join("models"),
            evaluation: out.join("evaluation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvConfig {
    /// Number of leave-one-user-out rounds; absent means eight per user.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
}

impl RunConfig {
    /// Reads a config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: Self = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    /// Propagates the master seed and checks cross-field constraints.
    pub fn resolve(mut self) -> Result<Self> {
        self.simulation.seed = self.seed;
        self.train.seed = self.seed;
        self.train.validate().context("invalid [train] section")?;
        if self.estimators.is_empty() {
            bail!("`estimators` must list at least one estimator kind");
        }
        if self.cv.rounds == Some(0) {
            bail!("`cv.rounds` must be positive");
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Writes the resolved config next to a stage's outputs.
    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        crate::write_text(&dir.join(RESOLVED_CONFIG), &self.to_toml())
    }
}
