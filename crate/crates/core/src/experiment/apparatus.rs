//! Binds a parsed optical table to concrete analyzer settings: patches
//! the labelled analysis elements (P2, HWP5, QWP2) per setting, compiles,
//! and extracts the arm measurement operators the coincidence engine
//! consumes.

use std::path::Path;

use crate::noise::{lift_rail_analyzer, reduce_to_rail_qubit, AnalyzerAngles, AnalyzerConfig};
use crate::optics::bell::{bell_projector, BellOutcome};
use crate::optics::{compile, parse_circuit, Arm, Circuit, CompiledCircuit};
use crate::qstate::{kets, Operator, PureState};
use crate::tomo::{anti_stokes_angles, stokes_p2_angle};
use crate::{C64, Error, Result};

/// A loaded and compiled optical table with the labelled analyzer
/// elements required by the experiment harness.
#[derive(Debug, Clone)]
pub struct Apparatus {
    pub circuit: Circuit,
    pub compiled: CompiledCircuit,
}

impl Apparatus {
    pub fn from_source(source: &str) -> Result<Self> {
        let circuit = parse_circuit(source)?;
        let compiled = compile(&circuit)?;
        let (_, s, a) = compiled.detector_counts();
        if s != 1 || a != 1 {
            return Err(Error::invalid(format!(
                "apparatus needs one Stokes and one anti-Stokes detector, got {s} and {a}"
            )));
        }
        for label in ["P2", "HWP5", "QWP2"] {
            if circuit.find(label).is_none() {
                return Err(Error::invalid(format!(
                    "apparatus circuit must label its analyzer element '{label}'"
                )));
            }
        }
        Ok(Apparatus { circuit, compiled })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read circuit {}: {e}", path.display())))?;
        Self::from_source(&source)
    }

    fn compiled_with(&self, patches: &[(&str, f64)]) -> Result<CompiledCircuit> {
        let mut circuit = self.circuit.clone();
        for (label, angle) in patches {
            circuit = circuit.with_angle(label, *angle)?;
        }
        compile(&circuit)
    }

    /// Anti-Stokes phonon analyzer for a basis label, through the
    /// compiled arm at the tabulated (HWP5, QWP2) angles.
    fn anti_stokes_povm(&self, label: &str) -> Result<(Operator, f64, f64)> {
        let (hwp5, qwp2) = anti_stokes_angles(label)?;
        let compiled = self.compiled_with(&[("HWP5", hwp5), ("QWP2", qwp2)])?;
        let povm = reduce_to_rail_qubit(&compiled.arm_measurement(Arm::AntiStokes));
        Ok((povm, hwp5, qwp2))
    }

    /// Stokes-arm analyzer for a path-qubit basis label in the
    /// entanglement-verification configuration. Linear bases rotate the
    /// polarizer P2; circular bases have no polarizer-only realization
    /// and are synthesized directly on the slaved subspace (the angle
    /// metadata then records the `+`-basis polarizer setting).
    fn stokes_povm(&self, label: &str) -> Result<(Operator, f64)> {
        match stokes_p2_angle(label) {
            Some(p2) => {
                let compiled = self.compiled_with(&[("P2", p2)])?;
                Ok((compiled.arm_measurement(Arm::Stokes), p2))
            }
            None => {
                let rail = kets::from_label(label)
                    .ok_or_else(|| Error::invalid(format!("unknown basis label '{label}'")))?;
                Ok((lift_rail_analyzer(&rail.projector()), 45.0))
            }
        }
    }

    /// Analyzer configuration for one cell of the two-qubit grid.
    pub fn verification_analyzer(&self, stokes_label: &str, as_label: &str) -> Result<AnalyzerConfig> {
        let (stokes, p2) = self.stokes_povm(stokes_label)?;
        let (anti_stokes, hwp5, qwp2) = self.anti_stokes_povm(as_label)?;
        Ok(AnalyzerConfig {
            setting_id: format!("s:{stokes_label}_as:{as_label}"),
            angles: AnalyzerAngles {
                hwp3: 0.0,
                p2,
                hwp5,
                qwp2,
            },
            stokes,
            anti_stokes,
        })
    }

    /// Polarizer-scan analyzer: P2 at an arbitrary angle, anti-Stokes
    /// fixed in the `(|U> - |L>)/√2` basis.
    pub fn scan_analyzer(&self, p2_deg: f64) -> Result<AnalyzerConfig> {
        let compiled = self.compiled_with(&[("P2", p2_deg)])?;
        let (anti_stokes, hwp5, qwp2) = self.anti_stokes_povm("-")?;
        Ok(AnalyzerConfig {
            setting_id: format!("scan:{p2_deg:06.1}"),
            angles: AnalyzerAngles {
                hwp3: 0.0,
                p2: p2_deg,
                hwp5,
                qwp2,
            },
            stokes: compiled.arm_measurement(Arm::Stokes),
            anti_stokes,
        })
    }

    /// Teleportation analyzer: the Bell measurement box at the canonical
    /// setting for `outcome` on the Stokes side, and a phonon basis on
    /// the anti-Stokes side.
    pub fn teleport_analyzer(
        &self,
        input_label: &str,
        outcome: BellOutcome,
        as_label: &str,
    ) -> Result<AnalyzerConfig> {
        let (hwp3, p2) = outcome.canonical_setting();
        let stokes = bell_projector(hwp3, p2)?;
        let (anti_stokes, hwp5, qwp2) = self.anti_stokes_povm(as_label)?;
        Ok(AnalyzerConfig {
            setting_id: format!("in:{input_label}_as:{as_label}"),
            angles: AnalyzerAngles {
                hwp3,
                p2,
                hwp5,
                qwp2,
            },
            stokes,
            anti_stokes,
        })
    }
}

/// Input state for a teleportation label.
pub fn input_state(label: &str) -> Result<PureState> {
    kets::from_label(label).ok_or_else(|| {
        Error::invalid(format!(
            "unknown input label '{label}' (expected one of H, V, +, -, L, R)"
        ))
    })
}

/// The effective two-qubit (Stokes path ⊗ phonon) state an
/// infinite-statistics raw reconstruction would converge to: signal plus
/// the marginal-product double-pair and accidental channels.
///
/// Shares its channel weights with the coincidence engine, which keeps
/// calibration and simulation consistent by construction.
pub fn effective_raw_state(
    state: &crate::noise::JointState,
    params: &crate::noise::NoiseParams,
    subtracted: bool,
) -> Result<crate::qstate::DensityMatrix> {
    use crate::qstate::DensityMatrix;
    if state.rho.dim() != 8 {
        return Err(Error::invalid("effective state needs the 8-dim joint state"));
    }
    // Logical reduction of the slaved photon: drop the polarization tag.
    let rail = {
        // Photon path ⊗ phonon, with the slaved pol traced coherently:
        // |pol,path,phonon> has pol ≡ path, so re-index by (path, phonon).
        let mut m = nalgebra::DMatrix::<C64>::zeros(4, 4);
        let full = state.rho.matrix();
        let idx = |path: usize, phonon: usize| -> usize {
            // pol = path for the slaved source.
            path * 4 + path * 2 + phonon
        };
        for p1 in 0..2 {
            for n1 in 0..2 {
                for p2 in 0..2 {
                    for n2 in 0..2 {
                        m[(p1 * 2 + n1, p2 * 2 + n2)] = full[(idx(p1, n1), idx(p2, n2))];
                    }
                }
            }
        }
        m
    };
    let core = DensityMatrix::from_physical(&rail / C64::new(rail.trace().re.max(1e-300), 0.0));

    let photon_marg = core.partial_trace(&[0])?;
    let phonon_marg = core.partial_trace(&[1])?;
    let product = DensityMatrix::from_physical(photon_marg.matrix().kronecker(phonon_marg.matrix()));

    let w_s = state.sectors.single;
    let w_d = state.sectors.double_pair;
    let w_prod = if subtracted {
        4.0 * w_d
    } else {
        let acc = if params.sbr.is_finite() {
            (2.0 * w_s + 4.0 * w_d) / (params.sbr - 1.0)
        } else {
            0.0
        };
        4.0 * w_d + acc
    };
    let total = w_s + w_prod;
    DensityMatrix::mixture(&[
        (w_s / total, core),
        (w_prod / total, product),
    ])
}
