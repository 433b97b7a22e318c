//! Physical model of the source, phonon decoherence, detection, and
//! backgrounds: per-setting outcome probabilities and Poissonian count
//! sampling with a delayed-window accidental channel.

pub mod coincidence;
pub mod counts;
pub mod params;
pub mod seed;
pub mod source;

pub use coincidence::{
    coincidence_probabilities, lift_rail_analyzer, reduce_to_rail_qubit, swap_path_pol,
    AnalyzerAngles, AnalyzerConfig, ProbabilityTable,
};
pub use counts::{
    read_count_records, read_count_records_file, sample_counts, write_count_records,
    write_count_records_file, CountRecord, SamplingMode,
};
pub use params::{DephasingMode, NoiseParams};
pub use seed::derive_rng;
pub use source::{
    dual_path_core_state, dual_path_source, emit_pair, phonon_decoherence, teleport_source,
    JointState, SectorWeights,
};
