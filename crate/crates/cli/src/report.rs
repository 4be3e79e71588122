//! The `run` report: a versioned JSON document.
//!
//! ```text
//! {
//!   "schema": "edafs-report/1",
//!   "config":    ExperimentConfig,
//!   "dataset":   { source, samples, features, classes, feature_names },
//!   "runs":      [ { run, seed, selected_indices, selected_names,
//!                    best_fitness, subset_size, evaluations, iterations,
//!                    metrics: { accuracy, precision, recall, f1, acc_pdf,
//!                               subset_size, sfr },
//!                    size_trajectory, best_fitness_trace } ],
//!   "aggregate": { runs, mean_subset_size, best_subset_size,
//!                  mean_best_fitness, mean_accuracy, mean_precision,
//!                  mean_recall, mean_f1, mean_acc_pdf }
//! }
//! ```
//!
//! `selected_indices` are 0-based and ascending. `size_trajectory[t]` is the
//! winner's subset size at iteration `t`.

use serde::{Deserialize, Serialize};

use edafs::data::Dataset;
use edafs::eda::RunResult;
use edafs::metrics::MetricsReport;

use crate::config::ExperimentConfig;

pub const REPORT_SCHEMA: &str = "edafs-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub runs: Vec<RunEntry>,
    pub aggregate: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub source: String,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub feature_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub run: usize,
    pub seed: u64,
    pub selected_indices: Vec<usize>,
    pub selected_names: Vec<String>,
    pub best_fitness: f64,
    pub subset_size: usize,
    pub evaluations: u64,
    pub iterations: usize,
    pub metrics: MetricsReport,
    pub size_trajectory: Vec<usize>,
    pub best_fitness_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_subset_size: f64,
    pub best_subset_size: usize,
    pub mean_best_fitness: f64,
    pub mean_accuracy: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub mean_acc_pdf: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

impl Report {
    pub fn build(config: &ExperimentConfig, dataset: &Dataset, results: &[RunResult]) -> Self {
        let runs: Vec<RunEntry> = results
            .iter()
            .enumerate()
            .map(|(run, r)| {
                let selected = r.best_subset.sorted();
                RunEntry {
                    run,
                    seed: r.seed,
                    selected_names: selected.iter().map(|&i| dataset.feature_names()[i].clone()).collect(),
                    selected_indices: selected,
                    best_fitness: r.best_fitness,
                    subset_size: r.best_subset.len(),
                    evaluations: r.evaluations,
                    iterations: r.trace.len(),
                    metrics: r.metrics.clone(),
                    size_trajectory: r.trace.iter().map(|t| t.winner_size).collect(),
                    best_fitness_trace: r.trace.iter().map(|t| t.best_fitness).collect(),
                }
            })
            .collect();

        let aggregate = Aggregate {
            runs: runs.len(),
            mean_subset_size: mean(runs.iter().map(|r| r.subset_size as f64)),
            best_subset_size: runs.iter().map(|r| r.subset_size).min().unwrap_or(0),
            mean_best_fitness: mean(runs.iter().map(|r| r.best_fitness)),
            mean_accuracy: mean(runs.iter().map(|r| r.metrics.accuracy)),
            mean_precision: mean(runs.iter().map(|r| r.metrics.precision)),
            mean_recall: mean(runs.iter().map(|r| r.metrics.recall)),
            mean_f1: mean(runs.iter().map(|r| r.metrics.f1)),
            mean_acc_pdf: mean(runs.iter().map(|r| r.metrics.acc_pdf)),
        };

        Report {
            schema: REPORT_SCHEMA.to_string(),
            config: config.clone(),
            dataset: DatasetSummary {
                source: config.dataset.clone(),
                samples: dataset.samples(),
                features: dataset.feature_count(),
                classes: dataset.class_count(),
                feature_names: dataset.feature_names().to_vec(),
            },
            runs,
            aggregate,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Parses a report and checks its internal consistency.
    pub fn parse(text: &str) -> Result<Self, String> {
        let report: Report = serde_json::from_str(text).map_err(|e| e.to_string())?;
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema != REPORT_SCHEMA {
            return Err(format!("unknown schema {:?}", self.schema));
        }
        if self.runs.len() != self.config.runs || self.aggregate.runs != self.runs.len() {
            return Err("run count disagrees with config".into());
        }
        let n = self.dataset.features;
        if self.dataset.feature_names.len() != n {
            return Err("feature name count disagrees with feature count".into());
        }
        for (i, r) in self.runs.iter().enumerate() {
            let ctx = |msg: &str| format!("run {i}: {msg}");
            if r.run != i {
                return Err(ctx("runs out of order"));
            }
            if r.subset_size == 0 || r.subset_size > n || r.selected_indices.len() != r.subset_size {
                return Err(ctx("subset size inconsistent"));
            }
            if r.selected_indices.windows(2).any(|w| w[0] >= w[1]) || r.selected_indices.iter().any(|&j| j >= n) {
                return Err(ctx("selected indices not strictly ascending in range"));
            }
            if r.selected_indices
                .iter()
                .zip(&r.selected_names)
                .any(|(&j, name)| &self.dataset.feature_names[j] != name)
            {
                return Err(ctx("selected names do not match indices"));
            }
            if r.evaluations as usize > self.config.evals || r.iterations * 2 != r.evaluations as usize {
                return Err(ctx("evaluation accounting inconsistent"));
            }
            if r.size_trajectory.len() != r.iterations || r.best_fitness_trace.len() != r.iterations {
                return Err(ctx("trace length differs from iteration count"));
            }
            if r.best_fitness_trace.windows(2).any(|w| w[1] < w[0]) {
                return Err(ctx("best fitness decreased"));
            }
            if r.best_fitness_trace.last() != Some(&r.best_fitness) {
                return Err(ctx("final best fitness differs from trace"));
            }
            let m = &r.metrics;
            if [m.accuracy, m.precision, m.recall, m.f1, m.acc_pdf, m.sfr]
                .iter()
                .any(|v| !(0.0..=1.0).contains(v))
            {
                return Err(ctx("metric outside [0, 1]"));
            }
            if m.subset_size != r.subset_size || m.acc_pdf > m.accuracy {
                return Err(ctx("metrics inconsistent with subset"));
            }
        }
        Ok(())
    }
}
