use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::PureState;

/// A dense complex square matrix on a tensor-product qubit space.
///
/// Unitarity and Hermiticity are *not* invariants of the type; operations
/// that require them check via [`Operator::is_unitary`] /
/// [`Operator::is_hermitian`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    /// Wraps a square matrix. Rejects non-square input.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::invalid(format!(
                "operator must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        Ok(Operator { mat })
    }

    /// Builds a `dim`×`dim` operator from a row-major slice of entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} operator, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Operator {
            mat: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    /// Real-entry convenience constructor (row-major).
    pub fn from_reals(dim: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &complex)
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// σx.
    pub fn pauli_x() -> Self {
        Self::from_reals(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    /// σy.
    pub fn pauli_y() -> Self {
        let i = C64::i();
        Self::from_rows(2, &[C64::ZERO, -i, i, C64::ZERO]).unwrap()
    }

    /// σz.
    pub fn pauli_z() -> Self {
        Self::from_reals(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// The single-qubit Hadamard gate.
    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(2, &[s, s, s, -s]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Kronecker product; `self` becomes the most significant factor.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            mat: self.mat.clone() * factor,
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        Ok(Operator {
            mat: &self.mat + &other.mat,
        })
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        Ok(Operator {
            mat: &self.mat * &other.mat,
        })
    }

    /// Applies the operator to a state vector (result is not renormalized).
    pub fn apply(&self, state: &PureState) -> Result<Vec<C64>> {
        if self.dim() != state.dim() {
            return Err(Error::DimMismatch(self.dim(), state.dim()));
        }
        let v = &self.mat * state.vector();
        Ok(v.iter().copied().collect())
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.mat.adjoint() * &self.mat;
        let id = DMatrix::<C64>::identity(self.dim(), self.dim());
        (prod - id).iter().all(|z| z.norm() <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().all(|z| z.norm() <= tol)
    }

    /// Checks idempotency `P² = P` (Hermiticity is checked separately).
    pub fn is_projector(&self, tol: f64) -> bool {
        let diff = &self.mat * &self.mat - &self.mat;
        self.is_hermitian(tol) && diff.iter().all(|z| z.norm() <= tol)
    }

    /// Normalizes the global phase so the first entry with magnitude above
    /// `1e-12` is real nonnegative. Makes golden-matrix comparisons
    /// deterministic.
    pub fn normalize_phase(&self) -> Operator {
        for z in self.mat.iter() {
            if z.norm() > 1e-12 {
                let phase = z / z.norm();
                return Operator {
                    mat: self.mat.clone() * phase.conj(),
                };
            }
        }
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tensor_of_basis_states_orders_left_factor_first() {
        // |0> ⊗ |1> -> amplitudes (0,1,0,0)
        let zero = PureState::basis(2, 0).unwrap();
        let one = PureState::basis(2, 1).unwrap();
        let prod = zero.tensor(&one);
        let amps = prod.amplitudes();
        assert_abs_diff_eq!(amps[0].re, 0.0);
        assert_abs_diff_eq!(amps[1].re, 1.0);
        assert_abs_diff_eq!(amps[2].re, 0.0);
        assert_abs_diff_eq!(amps[3].re, 0.0);
    }

    #[test]
    fn z_tensor_identity_on_11() {
        // Z ⊗ I applied to |11> -> -|11>
        let op = Operator::pauli_z().tensor(&Operator::identity(2));
        let ket11 = PureState::basis(4, 3).unwrap();
        let out = op.apply(&ket11).unwrap();
        assert_abs_diff_eq!(out[3].re, -1.0, epsilon = 1e-14);
        assert!(out[..3].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn hadamard_zero_tensor_zero() {
        // (H|0>) ⊗ |0> -> (1,0,1,0)/√2
        let h0 = PureState::new(Operator::hadamard().apply(&PureState::basis(2, 0).unwrap()).unwrap())
            .unwrap();
        let prod = h0.tensor(&PureState::basis(2, 0).unwrap());
        let amps = prod.amplitudes();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(amps[0].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(amps[1].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(amps[2].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(amps[3].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn phase_normalization_fixes_leading_entry() {
        let m = Operator::pauli_x().scale(C64::new(0.0, -1.0));
        let n = m.normalize_phase();
        assert!(n.matrix()[(0, 1)].re > 0.0);
        assert_abs_diff_eq!(n.matrix()[(0, 1)].im, 0.0, epsilon = 1e-14);
    }
}
