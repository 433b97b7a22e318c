//! TOML experiment configuration: `[scenario]`, `[noise]`, `[analysis]`.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::noise::{NoiseParams, SamplingMode};
use crate::optics::BellOutcome;
use crate::tomo::GridMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Entanglement,
    Teleport,
    VisibilityScan,
    Calibrate,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Entanglement => "entanglement",
            ScenarioKind::Teleport => "teleport",
            ScenarioKind::VisibilityScan => "visibility_scan",
            ScenarioKind::Calibrate => "calibrate",
        }
    }
}

fn default_input_states() -> Vec<String> {
    crate::tomo::SIX_LABELS.iter().map(|s| s.to_string()).collect()
}

fn default_bell_outcome() -> BellOutcome {
    BellOutcome::PhiPlus
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub circuit_file: PathBuf,
    pub output_dir: PathBuf,
    /// Input polarization states for teleportation runs.
    #[serde(default = "default_input_states")]
    pub input_states: Vec<String>,
    /// Which Bell outcome the run postselects (identity correction for
    /// the default; the other outcomes apply their Pauli frame at
    /// analysis time).
    #[serde(default = "default_bell_outcome")]
    pub bell_outcome: BellOutcome,
}

fn default_bootstrap_n() -> usize {
    500
}

fn default_subtract() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Seconds of integration per measurement setting.
    pub integration_time_per_setting: f64,
    #[serde(default = "default_bootstrap_n")]
    pub bootstrap_n: usize,
    #[serde(default = "default_subtract")]
    pub subtract_background: bool,
    #[serde(default)]
    pub sampling: SamplingMode,
    #[serde(default)]
    pub grid: GridMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub noise: NoiseParams,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file, resolving the circuit path relative to the
    /// config's directory.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_str(&text)?;
        if config.scenario.circuit_file.is_relative() {
            if let Some(dir) = path.parent() {
                config.scenario.circuit_file = dir.join(&config.scenario.circuit_file);
            }
        }
        if config.scenario.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                config.scenario.output_dir = dir.join(&config.scenario.output_dir);
            }
        }
        Ok((config, hash_bytes(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.analysis.integration_time_per_setting <= 0.0 {
            return Err(Error::config("integration_time_per_setting must be positive"));
        }
        if self.analysis.bootstrap_n < 100 {
            return Err(Error::config("bootstrap_n must be at least 100"));
        }
        if self.scenario.kind == ScenarioKind::Teleport {
            if self.scenario.input_states.is_empty() {
                return Err(Error::config("teleport runs need at least one input state"));
            }
            for label in &self.scenario.input_states {
                if crate::qstate::kets::from_label(label).is_none() {
                    return Err(Error::config(format!("unknown input state label '{label}'")));
                }
            }
        }
        Ok(())
    }

    /// Canonical hash used when the config was built programmatically.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        hash_bytes(text.as_bytes())
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + digest.len() * 2);
    out.push_str("sha256:");
    for byte in digest {
        use std::fmt::Write;
        write!(out, "{byte:02x}").expect("writing to string");
    }
    out
}
