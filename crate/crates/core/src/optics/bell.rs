//! Bell-projector synthesis for the measurement box (calcite C2, HWP3,
//! polarizer P2, detector APD2).
//!
//! The analyzer half-wave plate spans both paths ahead of the merger; the
//! lower arm sees it through one extra mirror reflection, so its fast
//! axis appears at `-θ` there. With the merge convention of
//! [`super::compile`], the four canonical settings `(HWP3, P2)` then
//! produce exactly the four Bell projectors:
//!
//! | HWP3 | P2   | projected state (path ⊗ pol basis)  |
//! |------|------|-------------------------------------|
//! | 0°   | 45°  | (|UH> + |LV>)/√2  (Φ+)             |
//! | 0°   | 135° | (|UH> - |LV>)/√2  (Φ-)             |
//! | 45°  | 45°  | (|UV> + |LH>)/√2  (Ψ+)             |
//! | 45°  | 135° | (|UV> - |LH>)/√2  (Ψ-)             |

use crate::qstate::{Operator, PureState};
use crate::{C64, Result};

use super::compile::{compile, Arm};
use super::element::{normalize_angle, Circuit, ElementKind, OpticalElement, PathSelector};

/// The four Bell outcomes of the measurement box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi_plus",
            BellOutcome::PhiMinus => "phi_minus",
            BellOutcome::PsiPlus => "psi_plus",
            BellOutcome::PsiMinus => "psi_minus",
        }
    }

    /// The `(HWP3, P2)` angles realizing this outcome.
    pub fn canonical_setting(&self) -> (f64, f64) {
        match self {
            BellOutcome::PhiPlus => (0.0, 45.0),
            BellOutcome::PhiMinus => (0.0, 135.0),
            BellOutcome::PsiPlus => (45.0, 45.0),
            BellOutcome::PsiMinus => (45.0, 135.0),
        }
    }

    /// The projected Bell state in the (path ⊗ polarization) basis.
    pub fn state(&self) -> PureState {
        let one = C64::ONE;
        let amps = match self {
            BellOutcome::PhiPlus => vec![one, C64::ZERO, C64::ZERO, one],
            BellOutcome::PhiMinus => vec![one, C64::ZERO, C64::ZERO, -one],
            BellOutcome::PsiPlus => vec![C64::ZERO, one, one, C64::ZERO],
            BellOutcome::PsiMinus => vec![C64::ZERO, one, -one, C64::ZERO],
        };
        PureState::normalized(amps).expect("bell state")
    }

    /// Pauli-frame correction for the receiver, in the logical basis that
    /// identifies the upper phonon path with `|H>`. A projection onto
    /// this outcome teleports `σ |Φ_in>`; applying `σ` again restores the
    /// input.
    pub fn correction(&self) -> Operator {
        match self {
            BellOutcome::PhiPlus => Operator::identity(2),
            BellOutcome::PhiMinus => Operator::pauli_z(),
            BellOutcome::PsiPlus => Operator::pauli_x(),
            BellOutcome::PsiMinus => Operator::pauli_z()
                .compose(&Operator::pauli_x())
                .expect("2x2 composition"),
        }
    }
}

/// Builds the measurement-box fragment for given `(HWP3, P2)` angles: the
/// analyzer plate at `+θ` on the upper path and `-θ` on the lower path,
/// the merging calcite, the polarizer, and the detector.
pub fn bell_fragment(hwp3_deg: f64, p2_deg: f64) -> Circuit {
    Circuit::new(vec![
        OpticalElement::new(ElementKind::SemicircleHwp, Some(hwp3_deg))
            .with_path(PathSelector::Upper)
            .with_label("HWP3u"),
        OpticalElement::new(ElementKind::SemicircleHwp, Some(normalize_angle(-hwp3_deg)))
            .with_path(PathSelector::Lower)
            .with_label("HWP3l"),
        OpticalElement::new(ElementKind::CalciteMerge, None).with_label("C2"),
        OpticalElement::new(ElementKind::Polarizer, Some(p2_deg)).with_label("P2"),
        OpticalElement::new(ElementKind::Detector, None).with_label("APD2"),
    ])
}

/// The rank-1 projector implemented by the measurement box at the given
/// `(HWP3, P2)` setting, on the 4-dimensional (path ⊗ polarization)
/// space. For the four canonical settings this yields the four Bell
/// projectors.
pub fn bell_projector(hwp3_deg: f64, p2_deg: f64) -> Result<Operator> {
    let compiled = compile(&bell_fragment(hwp3_deg, p2_deg))?;
    Ok(compiled.arm_measurement(Arm::Source).normalize_phase())
}

/// Measurement operator of the Stokes analyzer used for entanglement
/// verification: merge + polarizer at `p2_deg` + detector (no HWP3). On
/// the slaved source subspace this analyzes the path qubit along
/// `cos(p2)|U> - sin(p2)|L>`.
pub fn verification_analyzer(p2_deg: f64) -> Result<Operator> {
    let circuit = Circuit::new(vec![
        OpticalElement::new(ElementKind::CalciteMerge, None).with_label("C2"),
        OpticalElement::new(ElementKind::Polarizer, Some(p2_deg)).with_label("P2"),
        OpticalElement::new(ElementKind::Detector, None).with_label("APD2"),
    ]);
    let compiled = compile(&circuit)?;
    Ok(compiled.arm_measurement(Arm::Source))
}
