use crate::{C64, Error, Result};
use nalgebra::DVector;

use super::{Operator, Tolerances};

/// A normalized complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    /// Builds a state from amplitudes, enforcing unit squared-norm within
    /// the default tolerance (1e-12).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::with_tolerances(amps, Tolerances::default())
    }

    pub fn with_tolerances(amps: Vec<C64>, tol: Tolerances) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("state vector must be nonempty"));
        }
        let v = DVector::from_vec(amps);
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tol.norm {
            return Err(Error::physicality(format!(
                "pure state squared-norm {norm2} deviates from 1 beyond {}",
                tol.norm
            )));
        }
        Ok(PureState { amps: v })
    }

    /// Normalizes arbitrary nonzero amplitudes into a state.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        let s = norm2.sqrt();
        Self::new(amps.into_iter().map(|z| z / s).collect())
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::invalid(format!("basis index {k} out of range for dim {dim}")));
        }
        let mut amps = vec![C64::ZERO; dim];
        amps[k] = C64::ONE;
        Self::new(amps)
    }

    /// Single-qubit state `c0|0> + c1|1>`.
    pub fn qubit(c0: C64, c1: C64) -> Result<Self> {
        Self::new(vec![c0, c1])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<C64> {
        &self.amps
    }

    /// Kronecker product; `self` becomes the most significant factor.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amps.iter() {
            for b in other.amps.iter() {
                amps.push(a * b);
            }
        }
        PureState {
            amps: DVector::from_vec(amps),
        }
    }

    /// Rank-1 projector `|ψ><ψ|`.
    pub fn projector(&self) -> Operator {
        let d = self.dim();
        let mut m = nalgebra::DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        Operator::new(m).expect("projector from a valid state is square")
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Squared overlap `|<self|other>|²`.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Common polarization/path qubit states. `|0>` plays H (or the upper
/// path U) and `|1>` plays V (or the lower path L).
pub mod kets {
    use super::PureState;
    use crate::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn h() -> PureState {
        PureState::basis(2, 0).unwrap()
    }

    pub fn v() -> PureState {
        PureState::basis(2, 1).unwrap()
    }

    pub fn plus() -> PureState {
        PureState::qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)).unwrap()
    }

    pub fn minus() -> PureState {
        PureState::qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)).unwrap()
    }

    /// Left circular, `(|H> + i|V>)/√2`.
    pub fn left() -> PureState {
        PureState::qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)).unwrap()
    }

    /// Right circular, `(|H> - i|V>)/√2`.
    pub fn right() -> PureState {
        PureState::qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2)).unwrap()
    }

    /// Two-qubit Bell state `(|00> + |11>)/√2`.
    pub fn phi_plus() -> PureState {
        PureState::normalized(vec![C64::ONE, C64::ZERO, C64::ZERO, C64::ONE]).unwrap()
    }

    /// Looks up a basis label from the six-state set {H, V, +, -, L, R}.
    pub fn from_label(label: &str) -> Option<PureState> {
        match label {
            "H" => Some(h()),
            "V" => Some(v()),
            "+" => Some(plus()),
            "-" => Some(minus()),
            "L" => Some(left()),
            "R" => Some(right()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_enforced() {
        assert!(PureState::new(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)]).is_err());
        assert!(PureState::normalized(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)]).is_ok());
    }

    #[test]
    fn six_labels_resolve() {
        for label in ["H", "V", "+", "-", "L", "R"] {
            assert!(kets::from_label(label).is_some());
        }
        assert!(kets::from_label("Q").is_none());
    }

    #[test]
    fn circular_states_are_orthogonal() {
        let overlap = kets::left().overlap(&kets::right()).unwrap();
        assert!(overlap < 1e-14);
    }
}
