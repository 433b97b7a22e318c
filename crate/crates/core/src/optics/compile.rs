//! Lowering of parsed circuits to mode transforms on the 4-dimensional
//! (path ⊗ polarization) space, basis order `[UH, UV, LH, LV]`.
//!
//! Conventions fixed here and relied on everywhere downstream:
//!
//! - A calcite **split** takes a single beam on the `U` slot and displaces
//!   its `V` component onto `L`: `|U,H> -> |U,H>`, `|U,V> -> |L,V>`.
//! - A calcite **merge** recombines `|U,H>` and `|L,V>` into one beam on
//!   the `U` slot, with a π phase on the lower-path component (the lower
//!   arm picks up one extra reflection): `|U,H> -> |U,H>`,
//!   `|L,V> -> -|U,V>`. The non-combined components leave through the
//!   displaced port and are dropped.
//! - Dichroic mirrors are identity on the qubit space; they mark arm
//!   boundaries (source → Stokes → anti-Stokes) and carry only routing
//!   metadata.
//! - Every lowered element is phase-normalized: its first entry with
//!   magnitude above 1e-12 is made real nonnegative.

use crate::qstate::Operator;
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::element::{Circuit, ElementKind, OpticalElement, PathSelector};
use super::jones::{jones_hwp_raw, jones_qwp, polarizer_projector};

pub const DIM: usize = 4;

/// Index into the `[UH, UV, LH, LV]` basis.
pub fn mode_index(path_lower: bool, pol_v: bool) -> usize {
    (path_lower as usize) * 2 + (pol_v as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Unitary,
    Projector,
    /// Norm-nonincreasing isometry onto a subspace (calcite split/merge).
    PartialIsometry,
}

/// One lowered element (or folded run of elements).
#[derive(Debug, Clone)]
pub struct ModeTransform {
    pub operator: Operator,
    pub kind: TransformKind,
    pub label: Option<String>,
}

/// Which section of the table a transform belongs to. The segment before
/// the first dichroic is the source; the first dichroic starts the Stokes
/// arm, the second the anti-Stokes arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Source,
    Stokes,
    AntiStokes,
}

#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    /// Per-element transforms in table order.
    pub stages: Vec<(Arm, ModeTransform)>,
    /// Same pipeline with consecutive unitaries pre-multiplied.
    pub folded: Vec<(Arm, ModeTransform)>,
    /// Arm of every detector element, in table order.
    detector_marks: Vec<Arm>,
}

impl CompiledCircuit {
    pub(crate) fn new(stages: Vec<(Arm, ModeTransform)>, detector_marks: Vec<Arm>) -> Self {
        let folded = fold(&stages);
        CompiledCircuit {
            stages,
            folded,
            detector_marks,
        }
    }

    /// Ordered composition of an arm's transforms: the operator `A` with
    /// `A|ψ>` the (unnormalized) amplitude reaching the arm's detector.
    pub fn arm_chain(&self, arm: Arm) -> Operator {
        let mut acc = Operator::identity(DIM);
        for (a, t) in &self.stages {
            if *a == arm {
                acc = t.operator.compose(&acc).expect("4x4 composition");
            }
        }
        acc
    }

    /// The arm's effective measurement operator `A†A`: `<ψ|A†A|ψ>` is the
    /// detection probability for input `|ψ>`.
    pub fn arm_measurement(&self, arm: Arm) -> Operator {
        let a = self.arm_chain(arm);
        a.adjoint().compose(&a).expect("4x4 composition")
    }

    pub fn has_arm(&self, arm: Arm) -> bool {
        self.stages.iter().any(|(a, _)| *a == arm)
    }

    /// Number of detectors per arm, in (source, stokes, anti-stokes) order.
    pub fn detector_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for arm in &self.detector_marks {
            match arm {
                Arm::Source => counts.0 += 1,
                Arm::Stokes => counts.1 += 1,
                Arm::AntiStokes => counts.2 += 1,
            }
        }
        counts
    }
}

/// Lowers a single element to its 4-dimensional operator.
pub fn lower_element(el: &OpticalElement) -> Result<ModeTransform> {
    let (operator, kind) = match el.kind {
        ElementKind::Hwp | ElementKind::SemicircleHwp => {
            let j = jones_hwp_raw(el.angle_deg.expect("parser enforces angle"));
            (per_path(&j, el.path), TransformKind::Unitary)
        }
        ElementKind::Qwp => {
            let j = jones_qwp(el.angle_deg.expect("parser enforces angle"));
            (per_path(&j, el.path), TransformKind::Unitary)
        }
        ElementKind::Polarizer => {
            let p = polarizer_projector(el.angle_deg.expect("parser enforces angle"));
            (per_path(&p, el.path), TransformKind::Projector)
        }
        ElementKind::CalciteSplit => {
            let mut m = DMatrix::<C64>::zeros(DIM, DIM);
            m[(mode_index(false, false), mode_index(false, false))] = C64::ONE; // UH -> UH
            m[(mode_index(true, true), mode_index(false, true))] = C64::ONE; // UV -> LV
            (Operator::new(m)?, TransformKind::PartialIsometry)
        }
        ElementKind::CalciteMerge => {
            let mut m = DMatrix::<C64>::zeros(DIM, DIM);
            m[(mode_index(false, false), mode_index(false, false))] = C64::ONE; // UH -> UH
            m[(mode_index(false, true), mode_index(true, true))] = -C64::ONE; // LV -> -UV
            (Operator::new(m)?, TransformKind::PartialIsometry)
        }
        ElementKind::Dichroic => (Operator::identity(DIM), TransformKind::Unitary),
        ElementKind::Detector => match el.path {
            PathSelector::Both => (Operator::identity(DIM), TransformKind::Unitary),
            PathSelector::Upper | PathSelector::Lower => {
                let lower = el.path == PathSelector::Lower;
                let mut m = DMatrix::<C64>::zeros(DIM, DIM);
                m[(mode_index(lower, false), mode_index(lower, false))] = C64::ONE;
                m[(mode_index(lower, true), mode_index(lower, true))] = C64::ONE;
                (Operator::new(m)?, TransformKind::Projector)
            }
        },
    };
    Ok(ModeTransform {
        operator: operator.normalize_phase(),
        kind,
        label: el.label.clone(),
    })
}

/// Block-diagonal lift of a 2×2 polarization operator onto the selected
/// path(s), identity on the untouched path.
fn per_path(j: &Operator, path: PathSelector) -> Operator {
    let jm = j.matrix();
    let id = DMatrix::<C64>::identity(2, 2);
    let mut m = DMatrix::<C64>::zeros(DIM, DIM);
    let (upper, lower): (&DMatrix<C64>, &DMatrix<C64>) = match path {
        PathSelector::Both => (jm, jm),
        PathSelector::Upper => (jm, &id),
        PathSelector::Lower => (&id, jm),
    };
    for a in 0..2 {
        for b in 0..2 {
            m[(a, b)] = upper[(a, b)];
            m[(2 + a, 2 + b)] = lower[(a, b)];
        }
    }
    Operator::new(m).expect("4x4 construction")
}

/// Compiles a circuit: lowers every element, assigns arms at dichroic
/// boundaries, and constant-folds unitary runs.
pub fn compile(circuit: &Circuit) -> Result<CompiledCircuit> {
    let mut stages = Vec::new();
    let mut detector_marks = Vec::new();
    let mut arm = Arm::Source;
    let mut dichroics = 0usize;
    for el in &circuit.elements {
        if el.kind == ElementKind::Dichroic {
            dichroics += 1;
            arm = match dichroics {
                1 => Arm::Stokes,
                2 => Arm::AntiStokes,
                _ => {
                    return Err(Error::invalid(
                        "at most two dichroic forks (Stokes / anti-Stokes) are supported",
                    ))
                }
            };
            // The dichroic itself lowers to identity routing metadata and
            // belongs to the arm it opens.
        }
        let t = lower_element(el)?;
        if el.kind == ElementKind::Detector {
            detector_marks.push(arm);
        }
        stages.push((arm, t));
    }
    Ok(CompiledCircuit::new(stages, detector_marks))
}

fn fold(stages: &[(Arm, ModeTransform)]) -> Vec<(Arm, ModeTransform)> {
    let mut out: Vec<(Arm, ModeTransform)> = Vec::new();
    for (arm, t) in stages {
        if t.kind == TransformKind::Unitary {
            if let Some((prev_arm, prev)) = out.last_mut() {
                if *prev_arm == *arm && prev.kind == TransformKind::Unitary {
                    prev.operator = t.operator.compose(&prev.operator).expect("4x4 composition");
                    prev.label = None;
                    continue;
                }
            }
        }
        out.push((*arm, t.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_circuit;
    use super::*;
    use crate::qstate::{kets, PureState};
    use approx::assert_abs_diff_eq;

    fn lower_src(src: &str) -> CompiledCircuit {
        compile(&parse_circuit(src).unwrap()).unwrap()
    }

    #[test]
    fn hwp_on_both_paths_is_path_identity_tensor_x() {
        let c = lower_src("hwp @ 45");
        let op = c.arm_chain(Arm::Source);
        let expect = Operator::identity(2).tensor(&Operator::pauli_x());
        assert!(op.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn semicircle_pair_realizes_orthogonal_polarization_trick() {
        // semihwp 0° on U and 45° on L -> |U><U|⊗Z + |L><L|⊗X.
        let c = lower_src("semihwp @ 0 path=U\nsemihwp @ 45 path=L");
        let op = c.arm_chain(Arm::Source);
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        expect[(0, 0)] = C64::ONE;
        expect[(1, 1)] = -C64::ONE;
        expect[(2, 3)] = C64::ONE;
        expect[(3, 2)] = C64::ONE;
        assert!(op.max_abs_diff(&Operator::new(expect).unwrap()) < 1e-14);
    }

    #[test]
    fn unitary_segments_are_unitary_and_projectors_idempotent() {
        let c = lower_src("hwp @ 33\nqwp @ 10\npolarizer @ 77\nhwp @ 5");
        for (_, t) in &c.folded {
            match t.kind {
                TransformKind::Unitary => assert!(t.operator.is_unitary(1e-12)),
                TransformKind::Projector => assert!(t.operator.is_projector(1e-12)),
                TransformKind::PartialIsometry => {
                    let p = t.operator.adjoint().compose(&t.operator).unwrap();
                    assert!(p.is_projector(1e-12));
                }
            }
        }
    }

    #[test]
    fn folding_preserves_the_composed_map() {
        let src = "hwp @ 33\nqwp @ 10\npolarizer @ 77\nhwp @ 5\nqwp @ 81";
        let c = lower_src(src);
        let full = c.arm_chain(Arm::Source);
        let mut folded_chain = Operator::identity(DIM);
        for (_, t) in &c.folded {
            folded_chain = t.operator.compose(&folded_chain).unwrap();
        }
        assert!(full.max_abs_diff(&folded_chain) < 1e-12);
        // And on a few concrete states.
        for k in 0..4 {
            let input = PureState::basis(4, k).unwrap();
            let a = full.apply(&input).unwrap();
            let b = folded_chain.apply(&input).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn split_then_merge_restores_the_beam_up_to_lower_arm_phase() {
        let c = lower_src("calcite split\ncalcite merge\ndetector");
        let chain = c.arm_chain(Arm::Source);
        // |U,H> passes, |U,V> returns with the merge phase.
        let h_in = PureState::basis(4, 0).unwrap();
        let out = chain.apply(&h_in).unwrap();
        assert_abs_diff_eq!((out[0] - C64::ONE).norm(), 0.0, epsilon = 1e-14);
        let v_in = PureState::basis(4, 1).unwrap();
        let out = chain.apply(&v_in).unwrap();
        assert_abs_diff_eq!((out[1] + C64::ONE).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bell_analyzer_fragment_projects_on_phi_plus() {
        // The verification-layout Bell segment with HWP3 at 0° and P2 at
        // 45° measures (|H>|U> + |V>|L>)/√2, i.e. indices UH and LV.
        let c = lower_src("calcite merge label=C2\nhwp @ 0 label=HWP3\npolarizer @ 45 label=P2\ndetector label=APD2");
        let m = c.arm_measurement(Arm::Source);
        let phi_plus = PureState::normalized(vec![C64::ONE, C64::ZERO, C64::ZERO, C64::ONE]).unwrap();
        assert!(m.max_abs_diff(&phi_plus.projector()) < 1e-12);
    }

    #[test]
    fn arms_assigned_at_dichroic_boundaries() {
        let src = "calcite split\ndichroic\ncalcite merge\npolarizer @ 0\ndetector label=A\ndichroic\ncalcite merge\npolarizer @ 0\ndetector label=B";
        let c = lower_src(src);
        assert!(c.has_arm(Arm::Source));
        assert!(c.has_arm(Arm::Stokes));
        assert!(c.has_arm(Arm::AntiStokes));
        assert_eq!(c.detector_counts(), (0, 1, 1));
    }
}
