//! Run configuration: every tunable with its default, loaded from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::BiomarkerParams;
use crate::learn::search::Grid;
use crate::learn::{ClassifierKind, CvParams};
use crate::pipeline::{ModelKind, Tiling};

pub const DEFAULT_COHORT: &str = "healthy:0.4,osa_mild:0.15,osa_severe:0.15,copd_like:0.2,ovs_like:0.1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n: usize,
    pub cohort: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 100,
            cohort: DEFAULT_COHORT.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelKind,
    pub classifier: ClassifierKind,
    /// Window layout written by `extract`.
    pub tiling: Tiling,
    pub biomarkers: BiomarkerParams,
    pub cv: CvParams,
    pub grid: Grid,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            model: ModelKind::Model3,
            classifier: ClassifierKind::Rf,
            tiling: Tiling::Eval,
            biomarkers: BiomarkerParams::default(),
            cv: CvParams::default(),
            grid: Grid::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.grid.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills model-dependent defaults (the mRMR size) and the CV seed.
    pub fn resolve(mut self) -> RunConfig {
        if self.cv.k.is_none() {
            self.cv.k = self.model.default_k();
        }
        self.cv.seed = self.seed;
        self
    }

    /// Writes the effective configuration as `config.toml` under `dir`.
    pub fn echo(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.toml");
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))
    }
}
