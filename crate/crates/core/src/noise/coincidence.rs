//! Per-setting outcome probabilities: true coincidences via the Born
//! rule through the compiled pipeline, double-pair and accidental
//! channels via products of the arms' marginals.
//!
//! Channel conventions:
//!
//! - **True** coincidences live in the retained single-pair sector:
//!   `w_single · Tr[(Π_s ⊗ Π_as) ρ] · η_read η_s η_as`.
//! - **Double-pair** events contribute an uncorrelated marginal-product
//!   pattern with the two-photon combinatoric factor 4. They share the
//!   pulse with the signal, so background subtraction does not remove
//!   them.
//! - **Accidentals** (cross-pulse) use the same marginal-product shape,
//!   scaled so that raw/delayed = `sbr` at a perfectly correlated
//!   reference setting: `(2 w_single + 4 w_double) η m_s m_as / (sbr-1)`.
//!   With a unit-visibility source this reproduces the fringe-visibility
//!   form `(sbr-1)/(sbr+1)`.

use crate::optics::compile::CompiledCircuit;
use crate::qstate::Operator;
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::params::NoiseParams;
use super::source::JointState;

/// Analyzer-angle metadata recorded alongside counts. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnalyzerAngles {
    pub hwp3: f64,
    pub p2: f64,
    pub hwp5: f64,
    pub qwp2: f64,
}

impl AnalyzerAngles {
    pub fn zero() -> Self {
        AnalyzerAngles {
            hwp3: 0.0,
            p2: 0.0,
            hwp5: 0.0,
            qwp2: 0.0,
        }
    }
}

/// One measurement setting: the Stokes-arm POVM element on the photon's
/// (path ⊗ polarization) space and the anti-Stokes POVM element on the
/// phonon qubit, plus the angle metadata that realizes them.
#[derive(Debug, Clone)]
pub struct AnalyzerConfig {
    pub setting_id: String,
    pub angles: AnalyzerAngles,
    /// 4×4 measurement operator `A†A` of the Stokes arm, (path ⊗ pol).
    pub stokes: Operator,
    /// 2×2 measurement operator of the anti-Stokes arm on the phonon.
    pub anti_stokes: Operator,
}

/// Per-pulse outcome probabilities for one setting, by channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTable {
    pub true_coincidence: f64,
    pub doubles: f64,
    pub accidental: f64,
    pub singles_s: f64,
    pub singles_as: f64,
}

impl ProbabilityTable {
    /// Everything the raw coincidence channel sees in one pulse window.
    pub fn raw(&self) -> f64 {
        self.true_coincidence + self.doubles + self.accidental
    }
}

/// Permutation taking the (path ⊗ pol) index ordering to (pol ⊗ path).
pub fn swap_path_pol(op: &Operator) -> Operator {
    let mut s = DMatrix::<C64>::zeros(4, 4);
    for path in 0..2 {
        for pol in 0..2 {
            s[(pol * 2 + path, path * 2 + pol)] = C64::ONE;
        }
    }
    let m = &s * op.matrix() * s.adjoint();
    Operator::new(m).expect("4x4 permutation conjugation")
}

/// Isometry embedding a dual-rail qubit into the slaved (path ⊗ pol)
/// photon space: `|U> -> |U,H>`, `|L> -> |L,V>`. Used both to lift
/// abstract path-qubit analyzers and to reduce compiled arm operators.
fn slave_lift() -> DMatrix<C64> {
    let mut l = DMatrix::<C64>::zeros(4, 2);
    l[(0, 0)] = C64::ONE; // U -> UH
    l[(3, 1)] = C64::ONE; // L -> LV
    l
}

/// Reduces a compiled 4×4 arm measurement to the dual-rail qubit it
/// analyzes (phonon for the anti-Stokes arm, Stokes path qubit for the
/// verification arm).
pub fn reduce_to_rail_qubit(measurement: &Operator) -> Operator {
    let l = slave_lift();
    let m = l.adjoint() * measurement.matrix() * &l;
    Operator::new(m).expect("2x2 reduction")
}

/// Lifts an abstract dual-rail analyzer onto the slaved photon space.
pub fn lift_rail_analyzer(analyzer: &Operator) -> Operator {
    let l = slave_lift();
    let m = &l * analyzer.matrix() * l.adjoint();
    Operator::new(m).expect("4x4 lift")
}

/// Computes the per-pulse probability table for one analyzer setting.
///
/// `pipeline` must terminate in exactly one Stokes and one anti-Stokes
/// detector; `state.rho` must be the 8-dimensional joint state
/// (pol ⊗ path ⊗ phonon).
pub fn coincidence_probabilities(
    state: &JointState,
    pipeline: &CompiledCircuit,
    analyzer: &AnalyzerConfig,
    params: &NoiseParams,
) -> Result<ProbabilityTable> {
    params.validate()?;
    let (_, stokes_dets, as_dets) = pipeline.detector_counts();
    if stokes_dets != 1 || as_dets != 1 {
        return Err(Error::invalid(format!(
            "pipeline must terminate in exactly one Stokes and one anti-Stokes detector (got {stokes_dets} and {as_dets})"
        )));
    }
    if state.rho.dim() != 8 {
        return Err(Error::invalid(
            "coincidence evaluation needs the 8-dimensional joint state (pol ⊗ path ⊗ phonon)",
        ));
    }

    let stokes_pol_path = swap_path_pol(&analyzer.stokes);
    let eta = params.eta_read * params.eta_det_s * params.eta_det_as;

    // Born probability of a joint click in the single-pair sector.
    let joint_op = stokes_pol_path.tensor(&analyzer.anti_stokes);
    let born = state.rho.expectation(&joint_op)?;
    if born.im.abs() > 1e-9 {
        return Err(Error::physicality(format!(
            "joint Born value has imaginary residue {:.2e}",
            born.im
        )));
    }
    let born = born.re.max(0.0);

    // Arm marginals drive the uncorrelated channels.
    let rho_photon = state.rho.partial_trace(&[0, 1])?;
    let rho_phonon = state.rho.partial_trace(&[2])?;
    let m_s = rho_photon.expectation(&stokes_pol_path)?.re.max(0.0);
    let m_as = rho_phonon.expectation(&analyzer.anti_stokes)?.re.max(0.0);

    let w_single = state.sectors.single;
    let w_double = state.sectors.double_pair;

    let true_coincidence = w_single * born * eta;
    let doubles = w_double * 4.0 * m_s * m_as * eta;
    let accidental = if params.sbr.is_finite() {
        (2.0 * w_single + 4.0 * w_double) * eta * m_s * m_as / (params.sbr - 1.0)
    } else {
        0.0
    };

    let singles_s =
        params.eta_det_s * m_s * (w_single + state.sectors.no_retrieval + 2.0 * w_double);
    let singles_as = params.eta_read * params.eta_det_as * m_as * (w_single + 2.0 * w_double);

    Ok(ProbabilityTable {
        true_coincidence,
        doubles,
        accidental,
        singles_s,
        singles_as,
    })
}
