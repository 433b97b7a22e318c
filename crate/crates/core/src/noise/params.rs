use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which phonon decoherence mechanisms act between the write and read
/// pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingMode {
    AmplitudeDamping,
    PureDephasing,
    Both,
}

impl DephasingMode {
    pub fn damps_amplitude(&self) -> bool {
        matches!(self, DephasingMode::AmplitudeDamping | DephasingMode::Both)
    }

    pub fn dephases(&self) -> bool {
        matches!(self, DephasingMode::PureDephasing | DephasingMode::Both)
    }
}

/// Every physical imperfection knob of the source/detection model.
///
/// Times are picoseconds, rates MHz; all other fields dimensionless.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Stokes excitation probability per pulse and path.
    pub p_s: f64,
    /// Phonon → anti-Stokes retrieval efficiency.
    pub eta_read: f64,
    /// Stokes detector efficiency.
    pub eta_det_s: f64,
    /// Anti-Stokes detector efficiency.
    pub eta_det_as: f64,
    /// Phonon population lifetime (ps).
    pub tau_phonon: f64,
    /// Write → read pulse separation (ps).
    pub read_delay: f64,
    /// Pulse repetition rate (MHz).
    pub rep_rate: f64,
    /// Signal-to-background coincidence ratio: raw/delayed counts at the
    /// reference setting. Infinite (the default) disables the accidental
    /// channel; finite values must exceed 1.
    #[serde(default = "default_sbr")]
    pub sbr: f64,
    pub dephasing_mode: DephasingMode,
    pub include_double_pairs: bool,
    /// Root seed; every stochastic operation derives its own stream from
    /// `(seed, label)`.
    pub seed: u64,
    /// Dephasing time constant (ps); defaults to `tau_phonon`.
    #[serde(default)]
    pub tau_dephase: Option<f64>,
    /// Relative amplitude imbalance between the two source paths: the
    /// upper/lower single-pair weights become `(1 ± ε)/2`.
    #[serde(default)]
    pub path_imbalance: f64,
}

fn default_sbr() -> f64 {
    f64::INFINITY
}

impl NoiseParams {
    /// A noiseless configuration: unit efficiencies, no backgrounds, no
    /// double pairs, no decoherence window.
    pub fn noise_free(seed: u64) -> Self {
        NoiseParams {
            p_s: 0.01,
            eta_read: 1.0,
            eta_det_s: 1.0,
            eta_det_as: 1.0,
            tau_phonon: 7.0,
            read_delay: 0.0,
            rep_rate: 76.0,
            sbr: f64::INFINITY,
            dephasing_mode: DephasingMode::AmplitudeDamping,
            include_double_pairs: false,
            seed,
            tau_dephase: None,
            path_imbalance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p_s) {
            return Err(Error::config(format!("p_s = {} outside [0, 1)", self.p_s)));
        }
        for (name, v) in [
            ("eta_read", self.eta_read),
            ("eta_det_s", self.eta_det_s),
            ("eta_det_as", self.eta_det_as),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.tau_phonon <= 0.0 {
            return Err(Error::config("tau_phonon must be positive"));
        }
        if let Some(t) = self.tau_dephase {
            if t <= 0.0 {
                return Err(Error::config("tau_dephase must be positive"));
            }
        }
        if self.read_delay < 0.0 {
            return Err(Error::config("read_delay must be nonnegative"));
        }
        if self.rep_rate <= 0.0 {
            return Err(Error::config("rep_rate must be positive"));
        }
        if self.sbr <= 1.0 {
            return Err(Error::config(format!(
                "sbr = {} must exceed 1 (raw/delayed ratio at the reference setting)",
                self.sbr
            )));
        }
        if !(-1.0..=1.0).contains(&self.path_imbalance) {
            return Err(Error::config("path_imbalance must lie in [-1, 1]"));
        }
        Ok(())
    }

    pub fn tau_dephase(&self) -> f64 {
        self.tau_dephase.unwrap_or(self.tau_phonon)
    }

    /// Probability that a phonon is lost before the read pulse.
    pub fn damping_probability(&self) -> f64 {
        if self.dephasing_mode.damps_amplitude() && self.read_delay > 0.0 {
            1.0 - (-self.read_delay / self.tau_phonon).exp()
        } else {
            0.0
        }
    }

    /// Off-diagonal survival factor between the two phonon paths.
    pub fn dephasing_factor(&self) -> f64 {
        if self.dephasing_mode.dephases() && self.read_delay > 0.0 {
            (-self.read_delay / self.tau_dephase()).exp()
        } else {
            1.0
        }
    }

    /// Pulses fired during `seconds` of integration.
    pub fn pulses(&self, seconds: f64) -> f64 {
        self.rep_rate * 1e6 * seconds
    }
}
