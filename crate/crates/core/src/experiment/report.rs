//! Experiment reports: every derived scalar with its bootstrap error,
//! matrices, the per-setting count table, and provenance. Serialization
//! uses ordered maps throughout, so identical config + seed produces
//! byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::noise::CountRecord;
use crate::qstate::{DensityMatrix, ProcessMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TimelineEvent {
    pub event: String,
    pub t_ps: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ScalarEntry {
    pub value: f64,
    /// One bootstrap standard deviation (0 for exact quantities).
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceEntry {
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Trace-preservation residual for process fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CalibrationEntry {
    pub targets: BTreeMap<String, f64>,
    pub fitted: BTreeMap<String, f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Matrix serialized as nested rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn density_to_json(rho: &DensityMatrix) -> MatrixJson {
    matrix_to_json_raw(rho.matrix())
}

pub fn process_to_json(chi: &ProcessMatrix) -> MatrixJson {
    matrix_to_json_raw(chi.matrix())
}

pub fn matrix_to_json_raw(m: &nalgebra::DMatrix<crate::C64>) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    /// Simulated event times; the phonon readout precedes the completion
    /// of the Bell measurement (reversed time ordering).
    pub timeline: Vec<TimelineEvent>,
    pub scalars: BTreeMap<String, ScalarEntry>,
    pub matrices: BTreeMap<String, MatrixJson>,
    pub counts: Vec<CountRecord>,
    pub convergence: BTreeMap<String, ConvergenceEntry>,
    /// Settings whose background subtraction clamped at zero.
    pub clamped_settings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationEntry>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(scenario: &str, seed: u64, config_hash: String) -> Self {
        ExperimentReport {
            scenario: scenario.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash,
            timeline: Vec::new(),
            scalars: BTreeMap::new(),
            matrices: BTreeMap::new(),
            counts: Vec::new(),
            convergence: BTreeMap::new(),
            clamped_settings: Vec::new(),
            calibration: None,
            notes: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64, sigma: f64) {
        self.scalars.insert(key.to_string(), ScalarEntry { value, sigma });
    }

    pub fn get(&self, key: &str) -> Option<ScalarEntry> {
        self.scalars.get(key).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()?)?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("report.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::config(format!("cannot read report {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Plot-ready CSV emission (`x,y,yerr`) for the figure panels.
pub fn emit_plot_csv(report: &ExperimentReport, name: &str) -> Result<String> {
    let mut out = String::from("x,y,yerr\n");
    match name {
        "fig3a.csv" => {
            // Polarizer scan: raw coincidence counts vs P2 angle.
            let mut rows: Vec<(f64, u64)> = report
                .counts
                .iter()
                .filter(|r| r.setting_id.starts_with("scan:"))
                .map(|r| (r.p2, r.raw))
                .collect();
            if rows.is_empty() {
                return Err(Error::invalid("report has no polarizer-scan counts for fig3a"));
            }
            rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for (angle, raw) in rows {
                out.push_str(&format!("{},{},{}\n", angle, raw, (raw as f64).sqrt()));
            }
        }
        "fig4a.csv" | "fig4a_raw.csv" => {
            let suffix = if name == "fig4a.csv" { "sub" } else { "raw" };
            let mut x = 1usize;
            for label in crate::tomo::SIX_LABELS {
                if let Some(entry) = report.get(&format!("F_{label}_{suffix}")) {
                    out.push_str(&format!("{},{},{}\n", x, entry.value, entry.sigma));
                    x += 1;
                }
            }
            if let Some(avg) = report.get(&format!("F_avg6_{suffix}")) {
                out.push_str(&format!("{},{},{}\n", x, avg.value, avg.sigma));
            }
            if x == 1 {
                return Err(Error::invalid(
                    "report has no per-state teleportation fidelities for fig4a",
                ));
            }
        }
        other => {
            return Err(Error::config(format!(
                "unknown emission target '{other}' (expected fig3a.csv, fig4a.csv, fig4a_raw.csv)"
            )))
        }
    }
    Ok(out)
}
