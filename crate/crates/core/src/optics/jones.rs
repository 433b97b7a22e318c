//! Jones matrices for the polarization elements.
//!
//! Angles are fast-axis angles in degrees, measured from the horizontal.
//! The half-wave plate uses the standard real form
//! `[[cos2θ, sin2θ], [sin2θ, -cos2θ]]`; the quarter-wave plate is the
//! retarder `R(θ) diag(1, i) R(-θ)`, which squares exactly to the
//! half-wave plate at the same axis.

use crate::qstate::Operator;
use crate::C64;

/// Half-wave plate Jones matrix without phase normalization. The compiler
/// lowers from this form so that relative phases between the two paths'
/// plates survive into the 4-dimensional element.
pub(crate) fn jones_hwp_raw(theta_deg: f64) -> Operator {
    let t = 2.0 * theta_deg.to_radians();
    let (s, c) = (t.sin(), t.cos());
    Operator::from_reals(2, &[c, s, s, -c]).expect("2x2 construction cannot fail")
}

/// Half-wave plate with fast axis at `theta` degrees.
///
/// The result is phase-normalized (first entry real nonnegative), making
/// the physical 90° axis periodicity an exact matrix identity.
pub fn jones_hwp(theta_deg: f64) -> Operator {
    jones_hwp_raw(theta_deg).normalize_phase()
}

/// Quarter-wave plate with fast axis at `theta` degrees.
pub fn jones_qwp(theta_deg: f64) -> Operator {
    let t = theta_deg.to_radians();
    let (s, c) = (t.sin(), t.cos());
    let i = C64::i();
    let cc = C64::new(c * c, 0.0);
    let ss = C64::new(s * s, 0.0);
    let sc = C64::new(s * c, 0.0);
    Operator::from_rows(
        2,
        &[
            cc + i * ss,
            (C64::ONE - i) * sc,
            (C64::ONE - i) * sc,
            ss + i * cc,
        ],
    )
    .expect("2x2 construction cannot fail")
}

/// Rank-1 projector onto the linear polarization `cosθ|H> + sinθ|V>`.
pub fn polarizer_projector(theta_deg: f64) -> Operator {
    let t = theta_deg.to_radians();
    let (s, c) = (t.sin(), t.cos());
    Operator::from_reals(2, &[c * c, s * c, s * c, s * s]).expect("2x2 construction cannot fail")
}
