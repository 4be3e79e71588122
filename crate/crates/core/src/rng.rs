//! Seedable randomness and the sampling primitives used by the search.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`). Its
//! output is fixed by the algorithm, independent of platform and pointer
//! width, so golden files produced on one machine reproduce on another.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};

use crate::error::{Error, Result};

/// A single-owner deterministic random stream.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream for a named purpose, derived from this source's
    /// seed (not its current position).
    pub fn substream(&self, tag: u64) -> Self {
        Self::new(mix_seed(self.seed, tag))
    }

    /// Uniform variate in `[0, 1)` with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Draws an index with probability proportional to its weight.
    pub fn roulette_select(&mut self, weights: &[f64]) -> Result<usize> {
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight(i));
            }
            total += w;
        }
        if weights.is_empty() || total <= 0.0 {
            return Err(Error::DegenerateWeights);
        }

        let target = self.next_uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if target < acc {
                    return Ok(i);
                }
            }
        }
        // Rounding can leave `target` a hair above the accumulated sum.
        Ok(last_positive)
    }

    /// A χ²(d) variate.
    pub fn sample_chi_square(&mut self, d: usize) -> Result<f64> {
        if d < 1 {
            return Err(Error::arg("chi-square degrees of freedom must be >= 1"));
        }
        let dist = ChiSquared::new(d as f64).map_err(|e| Error::Invariant(format!("chi-square construction: {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    /// Stratified random partition of sample indices.
    ///
    /// Each class contributes `round(train_fraction * count)` members to the
    /// train side, clamped so both sides keep at least one. Returned index
    /// lists are sorted ascending.
    pub fn split_indices(&mut self, labels: &[usize], train_fraction: f64) -> Result<(Vec<usize>, Vec<usize>)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::arg(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        let classes = labels.iter().copied().max().map_or(0, |c| c + 1);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
        for (i, &c) in labels.iter().enumerate() {
            by_class[c].push(i);
        }

        let mut train = Vec::with_capacity(labels.len());
        let mut test = Vec::new();
        for (class, mut members) in by_class.into_iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::ClassTooSmall(class));
            }
            self.shuffle(&mut members);
            let take = ((train_fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
            train.extend_from_slice(&members[..take]);
            test.extend_from_slice(&members[take..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok((train, test))
    }
}

/// SplitMix64 finalizer over `seed` and `index`.
///
/// This is the documented rule for deriving per-run seeds from a master
/// seed: `run_seed = mix_seed(master, run_index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
