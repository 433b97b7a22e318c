use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::density::{hermitize, min_eigenvalue};
use super::{DensityMatrix, Operator, Tolerances};

/// The fixed single-qubit process basis `{I, X, Y = -iσy, Z}`.
///
/// All four basis operators are real matrices, which keeps χ real for
/// channels without a σy-imaginary component and makes `Tr(χ χ_id)`
/// manifestly real.
pub fn process_basis() -> [Operator; 4] {
    let x = Operator::pauli_x();
    let y = Operator::pauli_y().scale(C64::new(0.0, -1.0)); // -iσy = [[0,-1],[1,0]]
    let z = Operator::pauli_z();
    [Operator::identity(2), x, y, z]
}

/// A process (χ) matrix in the fixed basis `{I, X, -iσy, Z}`.
///
/// Hermitian and positive semidefinite by invariant. Trace preservation is
/// *reported*, not enforced: postselected channels are trace-nonincreasing
/// and get renormalized on application.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    chi: DMatrix<C64>,
}

impl ProcessMatrix {
    pub fn new(chi: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(chi, Tolerances::default())
    }

    pub fn with_tolerances(chi: DMatrix<C64>, tol: Tolerances) -> Result<Self> {
        if chi.nrows() != 4 || chi.ncols() != 4 {
            return Err(Error::invalid(format!(
                "process matrix must be 4x4, got {}x{}",
                chi.nrows(),
                chi.ncols()
            )));
        }
        for i in 0..4 {
            for j in 0..4 {
                let diff = (chi[(i, j)] - chi[(j, i)].conj()).norm();
                if diff > tol.hermiticity {
                    return Err(Error::physicality(format!(
                        "chi not Hermitian at ({i},{j}): residual {diff:.3e}"
                    )));
                }
            }
        }
        let herm = hermitize(&chi);
        let min_eig = min_eigenvalue(&herm);
        if min_eig < tol.eigenvalue_floor {
            return Err(Error::physicality(format!(
                "chi minimum eigenvalue {min_eig:.3e} below floor"
            )));
        }
        Ok(ProcessMatrix { chi: herm })
    }

    pub(crate) fn from_physical(chi: DMatrix<C64>) -> Self {
        ProcessMatrix { chi: hermitize(&chi) }
    }

    /// χ of the identity process: only the II entry is 1.
    pub fn identity() -> Self {
        let mut chi = DMatrix::<C64>::zeros(4, 4);
        chi[(0, 0)] = C64::ONE;
        ProcessMatrix { chi }
    }

    /// Diagonal χ from four nonnegative weights (Pauli channel).
    pub fn diagonal(weights: [f64; 4]) -> Result<Self> {
        let mut chi = DMatrix::<C64>::zeros(4, 4);
        for (i, w) in weights.iter().enumerate() {
            if *w < 0.0 {
                return Err(Error::invalid("diagonal chi weights must be nonnegative"));
            }
            chi[(i, i)] = C64::new(*w, 0.0);
        }
        ProcessMatrix::new(chi)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.chi
    }

    pub fn entry(&self, m: usize, n: usize) -> C64 {
        self.chi[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    /// Rescales χ to unit trace (the convention used for postselected
    /// channels before computing `F_p`).
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::physicality("chi trace must be positive to normalize"));
        }
        Ok(ProcessMatrix {
            chi: &self.chi * C64::new(1.0 / t, 0.0),
        })
    }

    /// Frobenius norm of `Σ_mn χ_mn E_n† E_m − I`, the trace-preservation
    /// residual. Zero for exactly trace-preserving channels; reported as a
    /// diagnostic for postselected fits.
    pub fn tp_residual(&self) -> f64 {
        let basis = process_basis();
        let mut acc = DMatrix::<C64>::zeros(2, 2);
        for m in 0..4 {
            for n in 0..4 {
                acc += basis[n].matrix().adjoint() * basis[m].matrix() * self.chi[(m, n)];
            }
        }
        acc -= DMatrix::<C64>::identity(2, 2);
        acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies the channel: `ρ_f = Σ_mn E_m ρ E_n† χ_mn`.
    ///
    /// The output is renormalized to unit trace when the channel is
    /// sub-trace-preserving; the kept trace (the postselection success
    /// weight) is returned alongside.
    pub fn apply_channel(&self, rho_in: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        if rho_in.dim() != 2 {
            return Err(Error::invalid("apply_channel expects a single-qubit state"));
        }
        let basis = process_basis();
        let mut out = DMatrix::<C64>::zeros(2, 2);
        for m in 0..4 {
            for n in 0..4 {
                let c = self.chi[(m, n)];
                if c.norm() < 1e-300 {
                    continue;
                }
                out += basis[m].matrix() * rho_in.matrix() * basis[n].matrix().adjoint() * c;
            }
        }
        let kept = out.trace().re;
        if kept <= 1e-14 {
            return Err(Error::physicality(
                "channel output has vanishing trace; nothing to renormalize",
            ));
        }
        let normalized = out * C64::new(1.0 / kept, 0.0);
        Ok((DensityMatrix::from_physical(normalized), kept))
    }
}

/// Process fidelity `F_p = Re Tr(χ χ_ref)`; the imaginary residue must be
/// below 1e-10.
pub fn process_fidelity(chi: &ProcessMatrix, chi_ref: &ProcessMatrix) -> Result<f64> {
    let prod = (chi.matrix() * chi_ref.matrix()).trace();
    if prod.im.abs() > 1e-10 {
        return Err(Error::physicality(format!(
            "process fidelity has imaginary residue {:.3e}",
            prod.im
        )));
    }
    Ok(prod.re)
}

/// Average teleportation fidelity from the process fidelity:
/// `F̄ = (2 F_p + 1)/3`.
pub fn average_fidelity_from_process(f_p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_p) {
        return Err(Error::invalid(format!("process fidelity {f_p} outside [0,1]")));
    }
    Ok((2.0 * f_p + 1.0) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::super::state::kets;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_channel_is_identity_map() {
        let chi = ProcessMatrix::identity();
        let rho = DensityMatrix::from_pure(&kets::left());
        let (out, kept) = chi.apply_channel(&rho).unwrap();
        assert!(out.trace_distance(&rho).unwrap() < 1e-12);
        assert_abs_diff_eq!(kept, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bit_flip_channel() {
        let chi = ProcessMatrix::diagonal([0.0, 1.0, 0.0, 0.0]).unwrap();
        let rho = DensityMatrix::from_pure(&kets::h());
        let (out, _) = chi.apply_channel(&rho).unwrap();
        let expect = DensityMatrix::from_pure(&kets::v());
        assert!(out.trace_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn dephasing_mix_sends_plus_to_mixed() {
        // chi = diag(1/2, 0, 0, 1/2) applied to |+><+| -> I/2.
        // Oracle: direct summation, (|+><+| + Z|+><+|Z)/2 = I/2.
        let chi = ProcessMatrix::diagonal([0.5, 0.0, 0.0, 0.5]).unwrap();
        let rho = DensityMatrix::from_pure(&kets::plus());
        let (out, kept) = chi.apply_channel(&rho).unwrap();
        assert!(out.trace_distance(&DensityMatrix::maximally_mixed(2)).unwrap() < 1e-12);
        assert_abs_diff_eq!(kept, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn process_fidelity_endpoints() {
        let id = ProcessMatrix::identity();
        assert_abs_diff_eq!(process_fidelity(&id, &id).unwrap(), 1.0, epsilon = 1e-14);
        let depol = ProcessMatrix::diagonal([0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(process_fidelity(&depol, &id).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn average_fidelity_formula() {
        assert_abs_diff_eq!(average_fidelity_from_process(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(average_fidelity_from_process(0.25).unwrap(), 0.5);
        // The paper's process fidelity maps to its reported average.
        let avg = average_fidelity_from_process(0.859).unwrap();
        assert!((avg - 0.906).abs() < 5e-4);
        assert!(average_fidelity_from_process(1.2).is_err());
        assert!(average_fidelity_from_process(-0.1).is_err());
    }

    #[test]
    fn tp_residual_zero_for_identity() {
        assert!(ProcessMatrix::identity().tp_residual() < 1e-14);
        // Half-trace chi has residual ||I/2 - I||_F = sqrt(2)/2.
        let half = ProcessMatrix::diagonal([0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(half.tp_residual(), 0.5 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn invariants_enforced() {
        let mut bad = DMatrix::<C64>::zeros(4, 4);
        bad[(0, 1)] = C64::new(0.5, 0.0);
        assert!(ProcessMatrix::new(bad).is_err());
        let mut neg = DMatrix::<C64>::zeros(4, 4);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(ProcessMatrix::new(neg).is_err());
    }
}
