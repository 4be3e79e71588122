//! The correlation-aware two-individual estimation-of-distribution search.

pub mod model;
pub mod search;
mod subset;

pub use model::{Adjustment, ProbabilityModel, UpdateParams, IM_TABLE, SV_TABLE, VALUE_CAP, VALUE_FLOOR};
pub use search::{
    compete, fitness, generate_individual, run, sample_subset_size, search, IterationRecord, RunConfig, RunResult,
    RunState, SearchConfig, SearchOutcome, UpdateGate, Winner,
};
pub use subset::FeatureSubset;

/// A model with every SV and IM entry at 1.
pub fn init_model(n: usize) -> crate::Result<ProbabilityModel> {
    ProbabilityModel::init(n, UpdateParams::default())
}
