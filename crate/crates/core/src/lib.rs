//! Desk-scale simulator and statistical-reconstruction toolkit for a
//! photon-to-phonon quantum teleportation experiment.
//!
//! The crate is organised around the stages of the experiment:
//!
//! - [`qstate`] — dense complex linear algebra for few-qubit states,
//!   channels and fidelity metrics.
//! - [`optics`] — a small optical-table DSL (`.oct` files), its compiler
//!   to (path ⊗ polarization) mode transforms, and Bell-projector
//!   synthesis.
//! - [`noise`] — the physical source/decoherence/detection model that
//!   turns a parameterized apparatus into per-setting coincidence
//!   probabilities and Poissonian counts.
//! - [`tomo`] — background subtraction, maximum-likelihood state and
//!   process tomography, visibility fitting and bootstrap errors.
//! - [`experiment`] — the scenario harness and report writer behind the
//!   `ptsim` command-line tool.
//!
//! Everything is deterministic under a configured seed: stochastic
//! operations derive independent RNG streams from `(root seed, label)`
//! so parallel and sequential execution produce identical results.

pub mod error;
pub mod experiment;
pub mod noise;
pub(crate) mod optim;
pub mod optics;
pub mod qstate;
pub mod tomo;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
