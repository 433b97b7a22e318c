//! Optical-table DSL, Jones calculus, and the compiler from parsed
//! circuits to (path ⊗ polarization) mode transforms.

pub mod bell;
pub mod compile;
pub mod element;
pub mod jones;
pub mod parse;

pub use bell::{bell_projector, BellOutcome};
pub use compile::{compile, Arm, CompiledCircuit, ModeTransform, TransformKind};
pub use element::{Circuit, ElementKind, ModeSpace, OpticalElement, PathSelector};
pub use jones::{jones_hwp, jones_qwp, polarizer_projector};
pub use parse::{parse_circuit, Diagnostic, ParseError};
