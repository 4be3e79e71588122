//! Method comparison over a score table.
//!
//! Output schema `edafs-stats/1`:
//!
//! ```text
//! {
//!   "schema": "edafs-stats/1",
//!   "metric": "acc_pdf" | null,
//!   "higher_is_better": true,
//!   "methods": [..], "blocks": [..],
//!   "wilcoxon": [ { a, b, n_effective, w_plus, w_minus, statistic,
//!                   p_value | null, note | null } ],
//!   "friedman": { statistic, df, p_value } | null,
//!   "friedman_note": string | null,
//!   "average_ranks": [ { method, mean_rank, best_count } ]
//! }
//! ```
//!
//! Ranks are 1 = best. Wilcoxon pairs cover every unordered pair `(a, b)`
//! with `a` listed before `b`; differences are `a − b`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use edafs::stats::{average_ranks, friedman, wilcoxon_signed_rank, FriedmanResult, WILCOXON_MAX_N};

use crate::report::Report;
use crate::{CliError, Result};

pub const STATS_SCHEMA: &str = "edafs-stats/1";

/// `scores[method][block]`, with names for both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    pub methods: Vec<String>,
    pub blocks: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    /// CSV with a header; the first column names the dataset, every other
    /// column is one method.
    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| CliError::Data(format!("{origin}: empty score table")))?;
        let methods: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        if methods.len() < 2 {
            return Err(CliError::Data(format!("{origin}: need at least two method columns")));
        }
        let mut blocks = Vec::new();
        let mut scores = vec![Vec::new(); methods.len()];
        for (i, line) in lines.enumerate() {
            let row = i + 2;
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != methods.len() + 1 {
                return Err(CliError::Data(format!(
                    "{origin}: row {row} has {} cells, expected {}",
                    cells.len(),
                    methods.len() + 1
                )));
            }
            blocks.push(cells[0].to_string());
            for (col, cell) in cells[1..].iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::Data(format!(
                        "{origin}: row {row}, column {}: not a number: {cell:?}",
                        col + 2
                    ))
                })?;
                if !v.is_finite() {
                    return Err(CliError::Data(format!(
                        "{origin}: row {row}, column {}: not finite",
                        col + 2
                    )));
                }
                scores[col].push(v);
            }
        }
        if blocks.is_empty() {
            return Err(CliError::Data(format!("{origin}: score table has no rows")));
        }
        Ok(ScoreTable {
            methods,
            blocks,
            scores,
        })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    /// One method per report, one block per run, valued by `metric`.
    pub fn from_reports(reports: &[(String, Report)], metric: &str) -> Result<Self> {
        if reports.len() < 2 {
            return Err(CliError::Usage("need at least two reports to compare".into()));
        }
        let runs = reports[0].1.runs.len();
        let mut scores = Vec::with_capacity(reports.len());
        for (name, report) in reports {
            if report.runs.len() != runs {
                return Err(CliError::Data(format!(
                    "{name}: {} runs, expected {runs}; reports must pair up run for run",
                    report.runs.len()
                )));
            }
            let column = report
                .runs
                .iter()
                .map(|r| metric_value(r, metric))
                .collect::<Result<Vec<f64>>>()?;
            scores.push(column);
        }
        Ok(ScoreTable {
            methods: reports.iter().map(|(name, _)| name.clone()).collect(),
            blocks: (0..runs).map(|r| format!("run{r}")).collect(),
            scores,
        })
    }
}

fn metric_value(run: &crate::report::RunEntry, metric: &str) -> Result<f64> {
    let m = &run.metrics;
    Ok(match metric {
        "accuracy" => m.accuracy,
        "precision" => m.precision,
        "recall" => m.recall,
        "f1" => m.f1,
        "acc_pdf" => m.acc_pdf,
        "sfr" => m.sfr,
        "subset_size" => run.subset_size as f64,
        "best_fitness" => run.best_fitness,
        other => return Err(CliError::Usage(format!("unknown metric {other:?}"))),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub n_effective: usize,
    pub w_plus: Option<f64>,
    pub w_minus: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodRank {
    pub method: String,
    pub mean_rank: f64,
    pub best_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsReport {
    pub schema: String,
    pub metric: Option<String>,
    pub higher_is_better: bool,
    pub methods: Vec<String>,
    pub blocks: Vec<String>,
    pub wilcoxon: Vec<PairTest>,
    pub friedman: Option<FriedmanResult>,
    pub friedman_note: Option<String>,
    pub average_ranks: Vec<MethodRank>,
}

impl StatsReport {
    pub fn build(table: &ScoreTable, metric: Option<&str>, higher_is_better: bool) -> Result<Self> {
        let mut pairs = Vec::new();
        for a in 0..table.methods.len() {
            for b in a + 1..table.methods.len() {
                let mut test = PairTest {
                    a: table.methods[a].clone(),
                    b: table.methods[b].clone(),
                    n_effective: table.blocks.len(),
                    w_plus: None,
                    w_minus: None,
                    statistic: None,
                    p_value: None,
                    note: None,
                };
                if table.blocks.len() > WILCOXON_MAX_N {
                    test.note = Some(format!(
                        "exact test limited to {WILCOXON_MAX_N} pairs; {} given",
                        table.blocks.len()
                    ));
                } else {
                    let w = wilcoxon_signed_rank(&table.scores[a], &table.scores[b])?;
                    test.n_effective = w.n_effective;
                    test.w_plus = Some(w.w_plus);
                    test.w_minus = Some(w.w_minus);
                    test.statistic = Some(w.statistic);
                    test.p_value = Some(w.p_value);
                }
                pairs.push(test);
            }
        }

        let (friedman, friedman_note) = match friedman(&table.scores) {
            Ok(f) => (Some(f), None),
            Err(edafs::Error::InvalidArgument(msg)) => (None, Some(msg)),
            Err(e) => return Err(e.into()),
        };

        let ranks = average_ranks(&table.scores, higher_is_better)?;
        let average_ranks = table
            .methods
            .iter()
            .zip(ranks.mean_ranks)
            .zip(ranks.best_counts)
            .map(|((method, mean_rank), best_count)| MethodRank {
                method: method.clone(),
                mean_rank,
                best_count,
            })
            .collect();

        Ok(StatsReport {
            schema: STATS_SCHEMA.into(),
            metric: metric.map(str::to_string),
            higher_is_better,
            methods: table.methods.clone(),
            blocks: table.blocks.clone(),
            wilcoxon: pairs,
            friedman,
            friedman_note,
            average_ranks,
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("stats report serializes");
        text.push('\n');
        text
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairTest> {
        self.wilcoxon
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }

    pub fn rank_of(&self, method: &str) -> Option<&MethodRank> {
        self.average_ranks.iter().find(|r| r.method == method)
    }
}
