//! Measurement-setting tables: the six-state basis per qubit, the
//! two-qubit grids, and the analyzer angles that realize each basis on
//! the apparatus.

use crate::qstate::kets;
use crate::Result;

use super::types::MeasurementSetting;

pub const SIX_LABELS: [&str; 6] = ["H", "V", "+", "-", "L", "R"];

/// Minimal informationally complete single-side label set.
pub const MINIMAL_LABELS: [&str; 4] = ["H", "V", "+", "L"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Full 6×6 local-basis grid (36 settings).
    #[default]
    Full36,
    /// 4×4 minimal grid (16 settings), for speed.
    Minimal16,
}

/// Six single-qubit settings (used for the teleported phonon qubit).
pub fn single_qubit_settings(prefix: &str) -> Vec<MeasurementSetting> {
    SIX_LABELS
        .iter()
        .map(|label| {
            MeasurementSetting::new(
                format!("{prefix}as:{label}"),
                kets::from_label(label).expect("known label").projector(),
                &[label],
            )
            .expect("projector by construction")
        })
        .collect()
}

/// Two-qubit grid over (Stokes path qubit ⊗ phonon qubit). Setting ids
/// look like `s:+_as:L`.
pub fn two_qubit_grid(mode: GridMode) -> Vec<MeasurementSetting> {
    let labels: &[&str] = match mode {
        GridMode::Full36 => &SIX_LABELS,
        GridMode::Minimal16 => &MINIMAL_LABELS,
    };
    let mut out = Vec::with_capacity(labels.len() * labels.len());
    for s in labels {
        for a in labels {
            let povm = kets::from_label(s)
                .expect("known label")
                .projector()
                .tensor(&kets::from_label(a).expect("known label").projector());
            out.push(
                MeasurementSetting::new(format!("s:{s}_as:{a}"), povm, &[s, a])
                    .expect("projector by construction"),
            );
        }
    }
    out
}

/// P2 angle realizing a Stokes path-qubit basis through the merging
/// calcite (the merge analyzer measures `cos(p2)|U> - sin(p2)|L>`).
/// Circular bases have no polarizer-only realization and are synthesized
/// directly as projectors; their angle metadata is `None`.
pub fn stokes_p2_angle(label: &str) -> Option<f64> {
    match label {
        "H" => Some(0.0),
        "V" => Some(90.0),
        "+" => Some(135.0),
        "-" => Some(45.0),
        _ => None,
    }
}

/// (HWP5, QWP2) angles realizing an anti-Stokes analysis basis with the
/// polarizer P3 fixed at 0°.
pub fn anti_stokes_angles(label: &str) -> Result<(f64, f64)> {
    match label {
        "H" => Ok((0.0, 0.0)),
        "V" => Ok((45.0, 0.0)),
        "+" => Ok((67.5, 0.0)),
        "-" => Ok((22.5, 0.0)),
        "L" => Ok((0.0, 45.0)),
        "R" => Ok((0.0, 135.0)),
        other => Err(crate::Error::invalid(format!("unknown basis label '{other}'"))),
    }
}
