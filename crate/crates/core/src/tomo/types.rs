use std::collections::BTreeMap;

use crate::qstate::{DensityMatrix, Operator, ProcessMatrix};
use crate::{Error, Result};

/// One measurement setting of the reconstruction problem.
#[derive(Debug, Clone)]
pub struct MeasurementSetting {
    pub setting_id: String,
    /// Projector on the analyzed subspace (2-dim for one qubit, 4-dim for
    /// the photon-phonon pair).
    pub povm_element: Operator,
    /// Basis label per analyzed qubit, from {H, V, +, -, L, R}.
    pub basis_labels: Vec<String>,
}

impl MeasurementSetting {
    pub fn new(id: impl Into<String>, povm: Operator, labels: &[&str]) -> Result<Self> {
        if !povm.is_projector(1e-10) {
            return Err(Error::invalid(format!(
                "POVM element of setting '{}' is not a projector",
                id.into()
            )));
        }
        Ok(MeasurementSetting {
            setting_id: id.into(),
            povm_element: povm,
            basis_labels: labels.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// A setting paired with its observed (possibly background-subtracted,
/// hence real-valued) count.
#[derive(Debug, Clone)]
pub struct Observation {
    pub setting: MeasurementSetting,
    pub value: f64,
}

/// What a tomography run estimated.
#[derive(Debug, Clone)]
pub enum Estimate {
    State(DensityMatrix),
    Process(ProcessMatrix),
}

/// Outcome of a maximum-likelihood reconstruction. The estimate satisfies
/// its type's physicality invariants by construction (Cholesky-style
/// parametrization).
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub estimate: Estimate,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Standard deviations of derived quantities, filled in by bootstrap.
    pub error_bars: BTreeMap<String, f64>,
    /// The observations the fit consumed (kept for downstream fits and
    /// provenance).
    pub observations: Vec<Observation>,
}

impl TomographyResult {
    pub fn state(&self) -> Result<&DensityMatrix> {
        match &self.estimate {
            Estimate::State(rho) => Ok(rho),
            Estimate::Process(_) => Err(Error::invalid("estimate is a process, not a state")),
        }
    }

    pub fn process(&self) -> Result<&ProcessMatrix> {
        match &self.estimate {
            Estimate::Process(chi) => Ok(chi),
            Estimate::State(_) => Err(Error::invalid("estimate is a state, not a process")),
        }
    }
}

/// Optimizer knobs for the MLE fits.
#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    /// Convergence threshold on the mean-log-likelihood gradient norm.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Random restarts (the first start is always the maximally mixed
    /// parametrization).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            grad_tol: 1e-8,
            max_iter: 100_000,
            restarts: 4,
            seed: 0xB0B5,
        }
    }
}
