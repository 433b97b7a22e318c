use crate::{C64, Error, Result};
use nalgebra::DMatrix;

use super::{Operator, PureState, Tolerances};

/// A density matrix: Hermitian, unit trace, positive semidefinite within
/// numerical slack. The invariants are checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(mat, Tolerances::default())
    }

    pub fn with_tolerances(mat: DMatrix<C64>, tol: Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::invalid(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = mat.nrows();
        for i in 0..dim {
            for j in 0..dim {
                let diff = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if diff > tol.hermiticity {
                    return Err(Error::physicality(format!(
                        "density matrix not Hermitian at ({i},{j}): residual {diff:.3e}"
                    )));
                }
            }
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > tol.trace || trace.im.abs() > tol.trace {
            return Err(Error::physicality(format!(
                "density matrix trace {trace} deviates from 1"
            )));
        }
        // Hermitize exactly before the eigenvalue check so the solver sees
        // a symmetric input.
        let herm = hermitize(&mat);
        let min_eig = min_eigenvalue(&herm);
        if min_eig < tol.eigenvalue_floor {
            return Err(Error::physicality(format!(
                "density matrix minimum eigenvalue {min_eig:.3e} below floor {:.1e}",
                tol.eigenvalue_floor
            )));
        }
        Ok(DensityMatrix { mat: herm })
    }

    /// Internal constructor for matrices that are physical by
    /// construction (e.g. `T†T / Tr` parametrizations).
    pub(crate) fn from_physical(mat: DMatrix<C64>) -> Self {
        DensityMatrix { mat: hermitize(&mat) }
    }

    pub fn from_pure(state: &PureState) -> Self {
        DensityMatrix {
            mat: state.projector().into_matrix(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { mat: m }
    }

    /// Werner-like mixture `p |Φ+><Φ+| + (1-p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("werner parameter must lie in [0,1]"));
        }
        let phi = super::state::kets::phi_plus().projector().into_matrix() * C64::new(p, 0.0);
        let mixed = DMatrix::<C64>::identity(4, 4) * C64::new((1.0 - p) / 4.0, 0.0);
        Ok(DensityMatrix { mat: phi + mixed })
    }

    /// Convex mixture of density matrices; weights must sum to 1.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("mixture of zero parts"));
        }
        let dim = parts[0].1.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let mut total = 0.0;
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimMismatch(rho.dim(), dim));
            }
            if *w < -1e-12 {
                return Err(Error::invalid("negative mixture weight"));
            }
            m += rho.matrix() * C64::new(*w, 0.0);
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
        }
        DensityMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// Expectation value `Tr(O ρ)` of a (typically Hermitian) operator.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimMismatch(op.dim(), self.dim()));
        }
        Ok((op.matrix() * &self.mat).trace())
    }

    /// Conjugates the state by a unitary: `U ρ U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::DimMismatch(u.dim(), self.dim()));
        }
        let m = u.matrix() * &self.mat * u.matrix().adjoint();
        Ok(DensityMatrix::from_physical(m))
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.mat.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Trace distance `½ ||ρ - σ||₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        let diff = hermitize(&(&self.mat - &other.mat));
        let eig = diff.symmetric_eigen();
        Ok(0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Reduced density matrix over the subsystems listed in `keep`
    /// (0-based, qubit 0 = most significant / left factor). The kept
    /// subsystems preserve their relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        if self.dim() != 1 << n {
            return Err(Error::invalid(format!(
                "partial trace requires a 2^n dimension, got {}",
                self.dim()
            )));
        }
        if keep.is_empty() {
            return Err(Error::invalid("keep set must be nonempty"));
        }
        let mut seen = vec![false; n];
        for &q in keep {
            if q >= n {
                return Err(Error::invalid(format!(
                    "subsystem index {q} out of range for {n} qubits"
                )));
            }
            if seen[q] {
                return Err(Error::invalid(format!("subsystem index {q} repeated")));
            }
            seen[q] = true;
        }
        let traced: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();

        // Qubit q occupies bit (n-1-q) of the flat index.
        let assemble = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                let bit = (kept_bits >> (keep.len() - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            idx
        };

        let mut out = DMatrix::<C64>::zeros(kd, kd);
        for i in 0..kd {
            for j in 0..kd {
                let mut acc = C64::ZERO;
                for t in 0..td {
                    acc += self.mat[(assemble(i, t), assemble(j, t))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::from_physical(out))
    }
}

pub(crate) fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn min_eigenvalue(herm: &DMatrix<C64>) -> f64 {
    let eig = herm.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::super::state::kets;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let rho = DensityMatrix::from_pure(&kets::phi_plus());
        for keep in [[0usize], [1usize]] {
            let red = rho.partial_trace(&keep).unwrap();
            assert_abs_diff_eq!(red.entry(0, 0).re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(red.entry(1, 1).re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(red.entry(0, 1).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_state_reduces_to_factor() {
        // trace out qubit 1 (the right factor) of |ψ>⊗|φ| -> |ψ><ψ|
        let psi = kets::plus();
        let phi = kets::left();
        let joint = DensityMatrix::from_pure(&psi.tensor(&phi));
        let red = joint.partial_trace(&[0]).unwrap();
        let expect = DensityMatrix::from_pure(&psi);
        assert!(red.trace_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn werner_half_reduces_to_maximally_mixed() {
        // Oracle: direct 4x4 arithmetic. Werner(0.5) = 0.5|Φ+><Φ+| + 0.5 I/4.
        // Tracing qubit 0: diagonal of the 2x2 block sums:
        //   (0.5*0.5 + 0.125 + 0.125, 0.5*0.5 + 0.125 + 0.125) = (0.5, 0.5).
        let rho = DensityMatrix::werner(0.5).unwrap();
        let red = rho.partial_trace(&[1]).unwrap();
        assert_abs_diff_eq!(red.entry(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(red.entry(1, 1).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(red.entry(0, 1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(red.entry(1, 0).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_subsystem_rejected() {
        let rho = DensityMatrix::werner(0.5).unwrap();
        assert!(rho.partial_trace(&[2]).is_err());
        assert!(rho.partial_trace(&[]).is_err());
    }

    #[test]
    fn invariants_enforced() {
        // trace != 1
        let m = DMatrix::<C64>::identity(2, 2);
        assert!(DensityMatrix::new(m).is_err());
        // not hermitian
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::ONE;
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // negative eigenvalue
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn partial_trace_of_product_is_left_factor() {
        // Invariant: partial_trace(tensor(ρ_A, ρ_B), keep=A) == ρ_A.
        let a = DensityMatrix::werner(0.3).unwrap();
        let b = DensityMatrix::from_pure(&kets::minus());
        let joint = DensityMatrix::from_physical(a.matrix().kronecker(b.matrix()));
        let red = joint.partial_trace(&[0, 1]).unwrap();
        assert!(red.trace_distance(&a).unwrap() < 1e-12);
    }
}
