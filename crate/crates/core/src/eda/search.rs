//! Two-individual search: sampling, competition, gated model updates and
//! the chi-square size guidance.

use serde::{Deserialize, Serialize};

use super::model::{normalize_log_weights, ProbabilityModel, UpdateParams};
use super::subset::FeatureSubset;
use crate::data::SplitDataset;
use crate::error::{Error, Result};
use crate::evaluator::{final_report, KnnConfig, KnnEvaluator, Protocol, SubsetEvaluator};
use crate::metrics::MetricsReport;
use crate::rng::RandomSource;

pub const DEFAULT_BUDGET: usize = 500;

/// Stream tags for deriving independent substreams from a run seed.
pub const STREAM_SPLIT: u64 = 1;
pub const STREAM_HOLDOUT: u64 = 2;
pub const STREAM_SEARCH: u64 = 3;

/// When a step's winner is allowed to update the model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateGate {
    /// Winner must beat the previous iteration's winner.
    #[default]
    PreviousWinner,
    /// Winner must beat the best fitness seen before this step.
    BestSoFar,
}

impl std::str::FromStr for UpdateGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "previous-winner" => Ok(UpdateGate::PreviousWinner),
            "best-so-far" => Ok(UpdateGate::BestSoFar),
            other => Err(Error::Config(format!(
                "unknown gate {other:?} (expected previous-winner or best-so-far)"
            ))),
        }
    }
}

/// `accuracy / (subset_size / n)`.
pub fn fitness(accuracy: f64, subset_size: usize, n: usize) -> f64 {
    accuracy / (subset_size as f64 / n as f64)
}

/// `clamp(round(χ²(d)), 1, n)`.
pub fn sample_subset_size(src: &mut RandomSource, d: usize, n: usize) -> Result<usize> {
    if d < 1 || d > n {
        return Err(Error::arg(format!("degrees of freedom {d} outside 1..={n}")));
    }
    let draw = src.sample_chi_square(d)?.round();
    Ok((draw as usize).clamp(1, n))
}

/// Draws `s` distinct features: the first from the significance
/// distribution, each later one from the conditional distribution given
/// those already drawn.
pub fn generate_individual(model: &ProbabilityModel, src: &mut RandomSource, s: usize) -> Result<FeatureSubset> {
    let n = model.n();
    if s < 1 || s > n {
        return Err(Error::arg(format!("subset size {s} outside 1..={n}")));
    }
    let first = src.roulette_select(&model.first_feature_distribution())?;
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut indices = Vec::with_capacity(s);
    indices.push(first);

    let mut logs = model.log_significance();
    model.accumulate_interaction(&mut logs, first);
    while indices.len() < s {
        let probs = normalize_log_weights(&logs, &chosen);
        let next = src.roulette_select(&probs)?;
        if chosen[next] {
            return Err(Error::Invariant(format!("feature {next} drawn twice")));
        }
        chosen[next] = true;
        indices.push(next);
        model.accumulate_interaction(&mut logs, next);
    }
    FeatureSubset::new(indices, n)
}

/// Which of two candidates won.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    First,
    Second,
}

/// Higher fitness wins; on an exact tie the smaller subset wins; after that
/// the first candidate wins.
pub fn compete(a: &FeatureSubset, fit_a: f64, b: &FeatureSubset, fit_b: f64) -> Winner {
    if fit_b > fit_a || (fit_b == fit_a && b.len() < a.len()) {
        Winner::Second
    } else {
        Winner::First
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Fitness evaluations; two per iteration.
    pub budget: usize,
    pub update: UpdateParams,
    pub gate: UpdateGate,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            update: UpdateParams::default(),
            gate: UpdateGate::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget < 2 || !self.budget.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "evaluation budget must be even and >= 2, got {}",
                self.budget
            )));
        }
        self.update.validate()
    }

    pub fn iterations(&self) -> usize {
        self.budget / 2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Degrees of freedom used to size this iteration's candidates.
    pub d: usize,
    pub winner_size: usize,
    pub winner_fitness: f64,
    pub loser_fitness: f64,
    pub best_fitness: f64,
    pub model_updated: bool,
}

/// Mutable search state for one run.
#[derive(Clone, Debug)]
pub struct RunState {
    pub model: ProbabilityModel,
    pub d: usize,
    pub prev_winner_fitness: Option<f64>,
    pub best: Option<(FeatureSubset, f64)>,
    pub iteration: usize,
    pub spent: usize,
    pub config: SearchConfig,
    pub trace: Vec<IterationRecord>,
}

impl RunState {
    /// Fresh model with `d = round(n / 2)`.
    pub fn new(n: usize, config: SearchConfig) -> Result<Self> {
        config.validate()?;
        let model = ProbabilityModel::init(n, config.update)?;
        Ok(Self {
            model,
            d: ((n as f64 / 2.0).round() as usize).clamp(1, n),
            prev_winner_fitness: None,
            best: None,
            iteration: 0,
            spent: 0,
            config,
            trace: Vec::with_capacity(config.iterations()),
        })
    }

    pub fn remaining(&self) -> usize {
        self.config.budget.saturating_sub(self.spent)
    }

    pub fn best_fitness(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1)
    }

    /// One iteration: sample two candidates, score them, compete, update
    /// the best subset, then apply the gated model update and the new
    /// degrees of freedom.
    pub fn step<E: SubsetEvaluator + ?Sized>(
        &mut self,
        evaluator: &mut E,
        src: &mut RandomSource,
    ) -> Result<&IterationRecord> {
        if self.remaining() < 2 {
            return Err(Error::BudgetExhausted);
        }
        let n = self.model.n();
        let d = self.d;
        let size_a = sample_subset_size(src, d, n)?;
        let size_b = sample_subset_size(src, d, n)?;
        let a = generate_individual(&self.model, src, size_a)?;
        let b = generate_individual(&self.model, src, size_b)?;

        let fit_a = fitness(evaluator.evaluate(&a)?, a.len(), n);
        let fit_b = fitness(evaluator.evaluate(&b)?, b.len(), n);
        self.spent += 2;

        let (winner, winner_fit, loser, loser_fit) = match compete(&a, fit_a, &b, fit_b) {
            Winner::First => (a, fit_a, b, fit_b),
            Winner::Second => (b, fit_b, a, fit_a),
        };

        let best_before = self.best_fitness();
        let gate_open = match (self.config.gate, self.prev_winner_fitness) {
            (_, None) => true,
            (UpdateGate::PreviousWinner, Some(prev)) => winner_fit > prev,
            (UpdateGate::BestSoFar, Some(_)) => winner_fit > best_before,
        };
        if winner_fit > best_before {
            self.best = Some((winner.clone(), winner_fit));
        }
        if gate_open {
            let (w, l) = (winner.binary_vector(), loser.binary_vector());
            self.model.apply_sv_update(&w, &l)?;
            self.model.apply_im_update(&w, &l)?;
        }
        self.prev_winner_fitness = Some(winner_fit);
        self.d = winner.len();

        self.trace.push(IterationRecord {
            iteration: self.iteration,
            d,
            winner_size: winner.len(),
            winner_fitness: winner_fit,
            loser_fitness: loser_fit,
            best_fitness: self.best_fitness(),
            model_updated: gate_open,
        });
        self.iteration += 1;
        Ok(self.trace.last().expect("record just pushed"))
    }
}

/// Outcome of the search loop alone, before test-set reporting.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best_subset: FeatureSubset,
    pub best_fitness: f64,
    pub model: ProbabilityModel,
    pub trace: Vec<IterationRecord>,
    pub evaluations: u64,
}

/// Runs the full loop until the budget is spent.
pub fn search<E: SubsetEvaluator + ?Sized>(
    n: usize,
    config: SearchConfig,
    evaluator: &mut E,
    src: &mut RandomSource,
) -> Result<SearchOutcome> {
    let mut state = RunState::new(n, config)?;
    while state.remaining() >= 2 {
        state.step(evaluator, src)?;
    }
    let (best_subset, best_fitness) = state
        .best
        .ok_or_else(|| Error::Invariant("search finished without a best subset".into()))?;
    Ok(SearchOutcome {
        best_subset,
        best_fitness,
        model: state.model,
        trace: state.trace,
        evaluations: evaluator.evaluations(),
    })
}

/// Everything needed for one seeded run on a prepared split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub search: SearchConfig,
    pub protocol: Protocol,
    pub knn: KnnConfig,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub best_subset: FeatureSubset,
    pub best_fitness: f64,
    pub model: ProbabilityModel,
    pub trace: Vec<IterationRecord>,
    pub evaluations: u64,
    pub metrics: MetricsReport,
}

/// Searches on `split` (already normalized) and reports the winner on the
/// test partition. The holdout partition and the search stream are both
/// derived from `seed`.
pub fn run(split: &SplitDataset, config: &RunConfig, seed: u64) -> Result<RunResult> {
    config.search.validate()?;
    let root = RandomSource::new(seed);
    let mut evaluator = KnnEvaluator::new(split, config.protocol, config.knn, &mut root.substream(STREAM_HOLDOUT))?;
    let outcome = search(
        split.feature_count(),
        config.search,
        &mut evaluator,
        &mut root.substream(STREAM_SEARCH),
    )?;
    let metrics = final_report(split, &outcome.best_subset, &config.knn)?;
    Ok(RunResult {
        seed,
        best_subset: outcome.best_subset,
        best_fitness: outcome.best_fitness,
        model: outcome.model,
        trace: outcome.trace,
        evaluations: outcome.evaluations,
        metrics,
    })
}
