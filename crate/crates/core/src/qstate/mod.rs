//! Dimension-generic complex linear algebra for few-qubit states,
//! channels, and fidelity metrics.
//!
//! Subsystem ordering is fixed project-wide: in every tensor product the
//! **left factor is the most significant subsystem**, i.e. qubit 0 of an
//! `n`-qubit object addresses the highest-order bits of the row/column
//! index. `tensor(a, b)` therefore stores `a` in the leading index bits.

mod density;
mod fidelity;
mod operator;
mod process;
mod state;

pub use density::DensityMatrix;
pub use fidelity::{fully_entangled_fraction, fully_entangled_fraction_sampled, state_fidelity};
pub use operator::Operator;
pub use process::{average_fidelity_from_process, process_basis, process_fidelity, ProcessMatrix};
pub use state::{kets, PureState};

/// Numerical tolerances for physicality checks. The values below are the
/// project defaults; constructors accept alternatives where a caller has
/// looser data (e.g. heavily background-subtracted estimates).
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Elementwise Hermiticity slack for density/process matrices.
    pub hermiticity: f64,
    /// Trace-normalization slack for density matrices.
    pub trace: f64,
    /// Most negative admissible eigenvalue (positivity slack).
    pub eigenvalue_floor: f64,
    /// Squared-norm slack for pure states.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-10,
            trace: 1e-10,
            eigenvalue_floor: -1e-8,
            norm: 1e-12,
        }
    }
}
