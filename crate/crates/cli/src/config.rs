use std::path::Path;

use serde::{Deserialize, Serialize};

use hellinger_discord::app::{DickeSettings, ModelParams, Settings};
use hellinger_discord::engine::OptimizerConfig;
use hellinger_discord::symmetric::SymmetricScan;
use hellinger_discord::{DiscordError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, trials: 50 }
    }
}

/// Contents of the TOML config file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bruteforce_grid: usize,
    pub optimizer: OptimizerConfig,
    pub symmetric: SymmetricScan,
    pub dicke: DickeSettings,
    /// Fixed model parameters for scans.
    pub model: ModelParams,
    pub verify: VerifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        let s = Settings::default();
        Self {
            bruteforce_grid: s.bruteforce_grid,
            optimizer: s.optimizer,
            symmetric: s.symmetric,
            dicke: s.dicke,
            model: ModelParams::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| DiscordError::Parse(format!("config {}: {e}", path.display())))
    }

    pub fn settings(&self) -> Settings {
        Settings {
            optimizer: self.optimizer.clone(),
            symmetric: self.symmetric,
            bruteforce_grid: self.bruteforce_grid,
            dicke: self.dicke,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
