//! Independent replicate runs over one dataset.
//!
//! Replicate `r` uses seed `mix_seed(master, r)`: the seed fixes that
//! run's train/test split, its holdout partition and its search stream.
//! Results come back in replicate order whichever executor ran them.

use crate::data::{normalize_minmax, Dataset, SplitDataset};
use crate::eda::search::STREAM_SPLIT;
use crate::eda::{run, RunConfig, RunResult};
use crate::error::Result;
use crate::rng::{mix_seed, RandomSource};

/// Share of samples in the outer train partition.
pub const TRAIN_FRACTION: f64 = 0.75;

/// Seed used by replicate `index`.
pub fn replicate_seed(master: u64, index: usize) -> u64 {
    mix_seed(master, index as u64)
}

/// The normalized train/test split for a run seed.
pub fn prepare_split(dataset: &Dataset, seed: u64) -> Result<SplitDataset> {
    let mut src = RandomSource::new(seed).substream(STREAM_SPLIT);
    Ok(normalize_minmax(SplitDataset::stratified(
        dataset,
        &mut src,
        TRAIN_FRACTION,
    )?))
}

pub fn run_replicate(dataset: &Dataset, config: &RunConfig, master: u64, index: usize) -> Result<RunResult> {
    let seed = replicate_seed(master, index);
    let split = prepare_split(dataset, seed)?;
    run(&split, config, seed)
}

/// Replicates `0..runs` one after another on the calling thread.
pub fn run_replicates_sequential(
    dataset: &Dataset,
    config: &RunConfig,
    master: u64,
    runs: usize,
) -> Result<Vec<RunResult>> {
    (0..runs).map(|r| run_replicate(dataset, config, master, r)).collect()
}

/// Replicates `0..runs` on the rayon pool.
#[cfg(feature = "parallel")]
pub fn run_replicates_parallel(
    dataset: &Dataset,
    config: &RunConfig,
    master: u64,
    runs: usize,
) -> Result<Vec<RunResult>> {
    use rayon::prelude::*;
    (0..runs)
        .into_par_iter()
        .map(|r| run_replicate(dataset, config, master, r))
        .collect()
}

/// Replicates `0..runs`, in parallel when the `parallel` feature is on.
pub fn run_replicates(dataset: &Dataset, config: &RunConfig, master: u64, runs: usize) -> Result<Vec<RunResult>> {
    #[cfg(feature = "parallel")]
    {
        run_replicates_parallel(dataset, config, master, runs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_replicates_sequential(dataset, config, master, runs)
    }
}
