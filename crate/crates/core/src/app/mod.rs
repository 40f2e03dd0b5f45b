//! Command-level workflows shared by the CLI and the Python bindings:
//! single-state evaluation, model scans and randomized verification.

pub mod discord;
pub mod scan;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::engine::OptimizerConfig;
use crate::error::{DiscordError, Result};
use crate::symmetric::SymmetricScan;

pub use discord::{run_discord, BasisEntry, DiscordReport, DiscordRequest, Method};
pub use scan::{render_csv, run_scan, Model, ModelParams, ScanRow, ScanSpec};
pub use verify::{run_verify, Suite, SuiteReport, VERIFY_TOL};

/// Significant digits kept in every emitted number.
pub const OUTPUT_DIGITS: usize = 12;

/// Rounds to [`OUTPUT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", OUTPUT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn format_number(x: f64) -> String {
    format!("{}", round_sig(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DickeSettings {
    /// Starting Fock cutoff; doubled until D^H changes by less than the
    /// convergence tolerance.
    pub fock_cutoff: usize,
    pub max_fock_cutoff: usize,
}

impl Default for DickeSettings {
    fn default() -> Self {
        Self {
            fock_cutoff: 40,
            max_fock_cutoff: 320,
        }
    }
}

/// Every tunable knob; the CLI fills this from defaults, a config file and
/// flags, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub optimizer: OptimizerConfig,
    pub symmetric: SymmetricScan,
    /// Points per angle axis for the `bruteforce` method.
    pub bruteforce_grid: usize,
    pub dicke: DickeSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            symmetric: SymmetricScan::default(),
            bruteforce_grid: 13,
            dicke: DickeSettings::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.dicke.fock_cutoff == 0 || self.dicke.max_fock_cutoff < 2 * self.dicke.fock_cutoff {
            return Err(DiscordError::Usage(
                "dicke.max_fock_cutoff must be at least twice dicke.fock_cutoff".into(),
            ));
        }
        Ok(())
    }
}
