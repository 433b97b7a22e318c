//! Scenario harness: wires source → circuit → sampling → reconstruction
//! into the entanglement-verification and teleportation experiments,
//! calibrates the noise model, and emits reproducible reports.

pub mod apparatus;
pub mod calibrate;
pub mod config;
pub mod entangle;
pub mod report;
pub mod teleport;

pub use apparatus::{effective_raw_state, input_state, Apparatus};
pub use calibrate::{analytic_observables, calibrate_noise, CalibrationOutcome, CalibrationTargets};
pub use config::{AnalysisConfig, ExperimentConfig, ScenarioConfig, ScenarioKind};
pub use entangle::run_entanglement;
pub use report::{emit_plot_csv, ExperimentReport, ScalarEntry};
pub use teleport::{bell_outcome_statistics, run_teleport};

use crate::{Error, Result};

/// Runs the scenario named by the configuration.
pub fn run(config: &ExperimentConfig, config_hash: &str) -> Result<ExperimentReport> {
    match config.scenario.kind {
        ScenarioKind::Entanglement | ScenarioKind::VisibilityScan => {
            run_entanglement(config, config_hash)
        }
        ScenarioKind::Teleport => run_teleport(config, config_hash),
        ScenarioKind::Calibrate => Err(Error::config(
            "calibration runs through the 'ptsim calibrate' subcommand, which supplies the targets",
        )),
    }
}
