use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use edafs::data::{generate_synthetic, generate_wide_synthetic, load_csv, Dataset, LabelColumn};
use edafs::eda::{RunConfig, SearchConfig, UpdateGate, UpdateParams};
use edafs::evaluator::{KnnConfig, Protocol};
use edafs::rng::RandomSource;

use crate::{CliError, Result};

pub const SYNTHETIC_SAMPLES: usize = 250;
pub const SYNTHETIC_NOISE: f64 = 0.02;

/// Where the samples come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    /// The ten-feature correlated benchmark.
    Synthetic,
    /// The widened benchmark with this many features.
    WideSynthetic(usize),
    Csv(PathBuf),
}

impl DatasetSource {
    /// `synthetic`, `synthetic:<n>` or a file path.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "synthetic" {
            return Ok(DatasetSource::Synthetic);
        }
        if let Some(n) = text.strip_prefix("synthetic:") {
            let n: usize = n
                .parse()
                .map_err(|_| CliError::Usage(format!("bad feature count in {text:?}")))?;
            if n < 10 {
                return Err(CliError::Usage(format!("{text:?}: need at least 10 features")));
            }
            return Ok(if n == 10 {
                DatasetSource::Synthetic
            } else {
                DatasetSource::WideSynthetic(n)
            });
        }
        Ok(DatasetSource::Csv(PathBuf::from(text)))
    }
}

/// Every knob of an experiment. Serialized verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: String,
    /// Label column name or 0-based index; the last column when absent.
    pub label: Option<String>,
    pub seed: u64,
    pub runs: usize,
    pub evals: usize,
    pub change_factor: f64,
    pub strong_mult: u32,
    pub k: usize,
    pub protocol: Protocol,
    pub gate: UpdateGate,
    pub out: Option<PathBuf>,
    pub heatmap_out: Option<PathBuf>,
    pub trajectory_out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: "synthetic".into(),
            label: None,
            seed: 42,
            runs: 10,
            evals: 500,
            change_factor: 0.01,
            strong_mult: 2,
            k: 5,
            protocol: Protocol::Holdout,
            gate: UpdateGate::PreviousWinner,
            out: None,
            heatmap_out: None,
            trajectory_out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(CliError::Usage("--runs must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        DatasetSource::parse(&self.dataset)?;
        self.update_params().validate()?;
        Ok(())
    }

    pub fn update_params(&self) -> UpdateParams {
        UpdateParams {
            change_factor: self.change_factor,
            strong_multiplier: self.strong_mult,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            search: SearchConfig {
                budget: self.evals,
                update: self.update_params(),
                gate: self.gate,
            },
            protocol: self.protocol,
            knn: KnnConfig { k: self.k },
        }
    }

    /// Loads or generates the dataset. Synthetic data are drawn from the
    /// master seed.
    pub fn load_dataset(&self) -> Result<Dataset> {
        let ds = match DatasetSource::parse(&self.dataset)? {
            DatasetSource::Synthetic => {
                generate_synthetic(&mut RandomSource::new(self.seed), SYNTHETIC_SAMPLES, SYNTHETIC_NOISE)?
            }
            DatasetSource::WideSynthetic(n) => {
                generate_wide_synthetic(&mut RandomSource::new(self.seed), SYNTHETIC_SAMPLES, n, SYNTHETIC_NOISE)?
            }
            DatasetSource::Csv(path) => {
                let label = match &self.label {
                    Some(token) => LabelColumn::parse(token),
                    None => last_column(&path)?,
                };
                load_csv(&path, &label)?
            }
        };
        Ok(ds)
    }
}

fn last_column(path: &std::path::Path) -> Result<LabelColumn> {
    let text = std::fs::read_to_string(path).map_err(|e| edafs::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let header = text.lines().next().unwrap_or_default();
    let columns = header.split(',').count();
    Ok(LabelColumn::Index(columns.saturating_sub(1)))
}
