//! Declarative run configuration: one TOML file with a table per command.
//! Command-line flags are applied on top, so flags win.

use std::path::Path;

use anyhow::Context;
use felm::bench::BenchConfig;
use felm::sim::{DatasetConfig, MissionConfig};
use felm::train::{TrainConfig, Trainer};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub trainer: Trainer,
    pub folds: usize,
    #[serde(flatten)]
    pub config: TrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { trainer: Trainer::Fit2Felm, folds: 5, config: TrainConfig::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DatasetConfig,
    pub train: TrainSection,
    pub bench: BenchConfig,
    pub mission: MissionConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display())).map_err(CliError::Runtime)?;
        toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(CliError::Validation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn partial_tables_keep_other_defaults() {
        let cfg: RunConfig = toml::from_str("[train]\ntrainer = \"elm\"\nrules = 4\n[mission]\ncircuits = 1\n").unwrap();
        assert_eq!(cfg.train.trainer, Trainer::Elm);
        assert_eq!(cfg.train.config.rules, 4);
        assert_eq!(cfg.train.folds, 5);
        assert_eq!(cfg.mission.circuits, 1);
        assert_eq!(cfg.mission.depths, MissionConfig::default().depths);
    }

    #[test]
    fn unknown_sections_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[trian]\nrules = 4\n").is_err());
    }

    #[test]
    fn defaults_survive_a_toml_round_trip() {
        let text = toml::to_string(&RunConfig::default()).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), RunConfig::default());
    }
}
