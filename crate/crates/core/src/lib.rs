//! Wrapper feature selection with a two-individual estimation-of-distribution
//! algorithm that learns pairwise feature interactions.
//!
//! The search keeps a significance vector (one score per feature) and a
//! symmetric interaction matrix (one score per feature pair). Each iteration
//! samples two subsets from that model, scores them with a classifier, and
//! nudges the model towards the winner. Subset sizes are drawn from a
//! chi-square distribution centred on the last winner's size.

pub mod analysis;
pub mod batch;
pub mod data;
pub mod eda;
mod error;
pub mod evaluator;
pub mod metrics;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
