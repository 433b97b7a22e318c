//! Source model: per-pulse emission sectors and the dual-path entangled
//! state, with phonon decoherence between the write and read pulses.
//!
//! The joint Hilbert space is ordered (photon-polarization ⊗ photon-path
//! ⊗ phonon-path); the single-pair sector density matrix is 8-dimensional
//! in that ordering (or trivial for the single-path source).

use crate::qstate::{DensityMatrix, PureState};
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::params::NoiseParams;

/// Probability mass per emission sector. Weights sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorWeights {
    /// No excitation this pulse.
    pub vacuum: f64,
    /// Exactly one photon-phonon pair, phonon retrievable.
    pub single: f64,
    /// Two pairs (any path combination), at least one retrievable.
    pub double_pair: f64,
    /// Pair emitted but the phonon decayed before the read pulse.
    pub no_retrieval: f64,
}

impl SectorWeights {
    pub fn sum(&self) -> f64 {
        self.vacuum + self.single + self.double_pair + self.no_retrieval
    }

    fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("vacuum", self.vacuum),
            ("single", self.single),
            ("double_pair", self.double_pair),
            ("no_retrieval", self.no_retrieval),
        ] {
            if !(-1e-12..=1.0 + 1e-12).contains(&w) {
                return Err(Error::physicality(format!("sector weight {name} = {w} out of range")));
            }
        }
        if (self.sum() - 1.0).abs() > 1e-10 {
            return Err(Error::physicality(format!(
                "sector weights sum to {}, not 1",
                self.sum()
            )));
        }
        Ok(())
    }
}

/// Emission state of one pulse: the normalized single-pair sector density
/// matrix plus scalar sector weights.
#[derive(Debug, Clone)]
pub struct JointState {
    /// Density matrix of the single-pair sector (8-dim for the dual-path
    /// source, trivial for a single-path source).
    pub rho: DensityMatrix,
    pub sectors: SectorWeights,
}

impl JointState {
    pub fn new(rho: DensityMatrix, sectors: SectorWeights) -> Result<Self> {
        sectors.validate()?;
        Ok(JointState { rho, sectors })
    }

    /// Probability mass in the postselected single-pair sector.
    pub fn norm_kept(&self) -> f64 {
        self.sectors.single
    }
}

/// Single-path source truncated at the double-pair term: vacuum with
/// weight `1 - p_s - p_s²`, one pair with `p_s`, two pairs with `p_s²`
/// (zero with doubles disabled, folded back into vacuum).
pub fn emit_pair(params: &NoiseParams) -> Result<JointState> {
    params.validate()?;
    let p = params.p_s;
    let double = if params.include_double_pairs { p * p } else { 0.0 };
    let sectors = SectorWeights {
        vacuum: 1.0 - p - double,
        single: p,
        double_pair: double,
        no_retrieval: 0.0,
    };
    let trivial = DensityMatrix::from_physical(DMatrix::from_element(1, 1, C64::ONE));
    JointState::new(trivial, sectors)
}

/// The normalized single-pair state of the dual-path source on the
/// (photon-path ⊗ phonon-path) pair, `√((1+ε)/2)|UU> + √((1-ε)/2)|LL>`.
pub fn dual_path_core_state(params: &NoiseParams) -> PureState {
    let eps = params.path_imbalance;
    let au = ((1.0 + eps) / 2.0).sqrt();
    let al = ((1.0 - eps) / 2.0).sqrt();
    PureState::new(vec![
        C64::new(au, 0.0),
        C64::ZERO,
        C64::ZERO,
        C64::new(al, 0.0),
    ])
    .expect("normalized by construction")
}

fn dual_sectors(params: &NoiseParams) -> SectorWeights {
    let p = params.p_s;
    let single = 2.0 * p * (1.0 - p);
    let double = if params.include_double_pairs {
        // Remainder above the two-path vacuum; ≈ 3 p_s² to leading order.
        let vac = (1.0 - p - p * p) * (1.0 - p - p * p);
        (1.0 - vac - single).max(0.0)
    } else {
        0.0
    };
    SectorWeights {
        vacuum: 1.0 - single - double,
        single,
        double_pair: double,
        no_retrieval: 0.0,
    }
}

/// Dual-path source in the entanglement-verification configuration: the
/// semicircle plates slave the photon polarization to its path
/// (upper → H, lower → V), so the single-pair sector is
/// `√((1+ε)/2)|H,U,U> + √((1-ε)/2)|V,L,L>`.
pub fn dual_path_source(params: &NoiseParams) -> Result<JointState> {
    params.validate()?;
    let core = dual_path_core_state(params);
    let a = core.amplitudes();
    let mut amps = vec![C64::ZERO; 8];
    amps[0] = a[0]; // |H,U,U>
    amps[7] = a[3]; // |V,L,L>
    let rho = DensityMatrix::from_pure(&PureState::new(amps).expect("normalized"));
    JointState::new(rho, dual_sectors(params))
}

/// Dual-path source in the teleportation configuration: the preparation
/// box resets the polarization to a uniform input state `|Φ_in>` across
/// both paths, leaving the path-phonon pair in the standard entangled
/// form.
pub fn teleport_source(params: &NoiseParams, input: &PureState) -> Result<JointState> {
    params.validate()?;
    if input.dim() != 2 {
        return Err(Error::invalid("teleportation input must be a polarization qubit"));
    }
    let joint = input.tensor(&dual_path_core_state(params));
    JointState::new(DensityMatrix::from_pure(&joint), dual_sectors(params))
}

/// Applies phonon decoherence accumulated over the write→read delay.
///
/// Amplitude damping moves single-pair weight into the no-retrieval
/// sector (the postselected state itself is unchanged: both dual-rail
/// modes damp equally). Pure dephasing damps coherences between the two
/// phonon paths by `exp(-Δt/τ_dephase)`.
pub fn phonon_decoherence(state: &JointState, params: &NoiseParams) -> Result<JointState> {
    params.validate()?;
    let mut sectors = state.sectors;
    let p_damp = params.damping_probability();
    if p_damp > 0.0 {
        let lost_single = sectors.single * p_damp;
        // A double emission hosts two phonons; it leaves the retrievable
        // pool only when both are lost.
        let lost_double = sectors.double_pair * p_damp * p_damp;
        sectors.single -= lost_single;
        sectors.double_pair -= lost_double;
        sectors.no_retrieval += lost_single + lost_double;
    }

    let d = params.dephasing_factor();
    let rho = if d < 1.0 && state.rho.dim() == 8 {
        let mut m = state.rho.matrix().clone();
        for i in 0..8 {
            for j in 0..8 {
                // Phonon occupies the least significant qubit.
                if (i & 1) != (j & 1) {
                    m[(i, j)] *= C64::new(d, 0.0);
                }
            }
        }
        DensityMatrix::from_physical(m)
    } else {
        state.rho.clone()
    };
    JointState::new(rho, sectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{kets, state_fidelity};
    use approx::assert_abs_diff_eq;

    fn params(p_s: f64, doubles: bool) -> NoiseParams {
        let mut p = NoiseParams::noise_free(7);
        p.p_s = p_s;
        p.include_double_pairs = doubles;
        p
    }

    #[test]
    fn emit_pair_zero_probability_is_pure_vacuum() {
        let st = emit_pair(&params(0.0, true)).unwrap();
        assert_abs_diff_eq!(st.sectors.vacuum, 1.0, epsilon = 1e-15);
        assert_eq!(st.sectors.single, 0.0);
        assert_eq!(st.sectors.double_pair, 0.0);
    }

    #[test]
    fn emit_pair_weights_without_doubles() {
        let st = emit_pair(&params(0.01, false)).unwrap();
        assert_abs_diff_eq!(st.sectors.vacuum, 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(st.sectors.single, 0.01, epsilon = 1e-15);
        assert_eq!(st.sectors.double_pair, 0.0);
    }

    #[test]
    fn emit_pair_doubles_scale_quadratically() {
        let st = emit_pair(&params(0.1, true)).unwrap();
        assert_abs_diff_eq!(st.sectors.double_pair, 0.01, epsilon = 1e-15);
        // Two-point sweep: the double/single ratio grows linearly in p_s,
        // which is what propagates into the downstream coincidence error.
        let lo = emit_pair(&params(0.01, true)).unwrap();
        let hi = emit_pair(&params(0.02, true)).unwrap();
        let r_lo = lo.sectors.double_pair / lo.sectors.single;
        let r_hi = hi.sectors.double_pair / hi.sectors.single;
        assert_abs_diff_eq!(r_hi / r_lo, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn dual_path_noise_free_sector_is_maximally_entangled() {
        let p = params(0.01, false);
        let core = dual_path_core_state(&p);
        let f = state_fidelity(&kets::phi_plus(), &DensityMatrix::from_pure(&core)).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dual_path_norm_kept() {
        let st = dual_path_source(&params(0.01, true)).unwrap();
        assert_abs_diff_eq!(st.norm_kept(), 2.0 * 0.01 * 0.99, epsilon = 1e-6);
    }

    #[test]
    fn path_imbalance_sets_schmidt_coefficients() {
        // Oracle: eigenvalues of the reduced density matrix are the
        // squared Schmidt coefficients.
        let mut p = params(0.01, false);
        p.path_imbalance = 0.1;
        let core = DensityMatrix::from_pure(&dual_path_core_state(&p));
        let reduced = core.partial_trace(&[0]).unwrap();
        let eigs = reduced.eigenvalues();
        assert_abs_diff_eq!(eigs[1], 0.55, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[0], 0.45, epsilon = 1e-12);
    }

    #[test]
    fn decoherence_identity_at_zero_delay() {
        let p = params(0.01, true);
        let st = dual_path_source(&p).unwrap();
        let out = phonon_decoherence(&st, &p).unwrap();
        assert_eq!(out.sectors, st.sectors);
        assert!(out.rho.trace_distance(&st.rho).unwrap() < 1e-14);
    }

    #[test]
    fn amplitude_damping_kills_retrieval_in_the_long_delay_limit() {
        let mut p = params(0.01, false);
        p.read_delay = 1e6;
        let st = dual_path_source(&p).unwrap();
        let out = phonon_decoherence(&st, &p).unwrap();
        assert!(out.sectors.single < 1e-12);
        assert_abs_diff_eq!(out.sectors.no_retrieval, st.sectors.single, epsilon = 1e-12);
    }

    #[test]
    fn pure_dephasing_damps_the_cross_path_coherence() {
        let mut p = params(0.01, false);
        p.read_delay = 0.388;
        p.tau_phonon = 7.0;
        p.dephasing_mode = super::super::params::DephasingMode::PureDephasing;
        let st = dual_path_source(&p).unwrap();
        let out = phonon_decoherence(&st, &p).unwrap();
        let expected = (-0.388f64 / 7.0).exp();
        assert_abs_diff_eq!(expected, 0.9461, epsilon = 5e-5);
        let before = st.rho.entry(0, 7).re;
        let after = out.rho.entry(0, 7).re;
        assert_abs_diff_eq!(after / before, expected, epsilon = 1e-12);
        // Populations untouched, sectors untouched.
        assert_abs_diff_eq!(out.rho.entry(0, 0).re, st.rho.entry(0, 0).re, epsilon = 1e-15);
        assert_eq!(out.sectors, st.sectors);
    }

    #[test]
    fn teleport_source_carries_the_input_polarization() {
        let p = params(0.01, false);
        let st = teleport_source(&p, &kets::plus()).unwrap();
        let pol = st.rho.partial_trace(&[0]).unwrap();
        let f = state_fidelity(&kets::plus(), &pol).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        let pair = st.rho.partial_trace(&[1, 2]).unwrap();
        let f = state_fidelity(&kets::phi_plus(), &pair).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }
}
