use std::path::{Path, PathBuf};

use edafs::analysis::{aggregate_heatmaps, conditional_heatmap, mean_size_trajectory, trajectory_csv, HeatmapMatrix};
use edafs::batch::run_replicates;
use edafs::data::generate_synthetic;
use edafs::data::generate_wide_synthetic;
use edafs::eda::{init_model, RunResult};
use edafs::rng::RandomSource;

use crate::config::ExperimentConfig;
use crate::report::Report;
use crate::stats_report::{ScoreTable, StatsReport};
use crate::{write_atomic, CliError, Result};

/// Runs every replicate, then writes the report and any requested extras.
/// Nothing is written unless all runs succeed.
pub fn cmd_run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let dataset = config.load_dataset()?;
    let results = run_replicates(&dataset, &config.run_config(), config.seed, config.runs)?;
    let report = Report::build(config, &dataset, &results);
    report
        .validate()
        .map_err(|msg| edafs::Error::Invariant(format!("emitted report is inconsistent: {msg}")))?;

    let heatmap = match &config.heatmap_out {
        Some(_) => Some(heatmap_of(&results)?),
        None => None,
    };
    let trajectory = match &config.trajectory_out {
        Some(_) => {
            let traces: Vec<&[_]> = results.iter().map(|r| r.trace.as_slice()).collect();
            Some(trajectory_csv(&mean_size_trajectory(&traces)?))
        }
        None => None,
    };

    match &config.out {
        Some(path) => write_atomic(path, &report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    if let (Some(path), Some(h)) = (&config.heatmap_out, heatmap) {
        write_atomic(path, &h.to_csv_string())?;
    }
    if let (Some(path), Some(t)) = (&config.trajectory_out, trajectory) {
        write_atomic(path, &t)?;
    }
    Ok(report)
}

fn heatmap_of(results: &[RunResult]) -> Result<HeatmapMatrix> {
    let maps: Vec<HeatmapMatrix> = results.iter().map(|r| conditional_heatmap(&r.model)).collect();
    Ok(aggregate_heatmaps(&maps)?)
}

/// Mean conditional heatmap of the final models over `config.runs` runs.
/// With a zero budget the untouched initial model is reported.
pub fn cmd_heatmap(config: &ExperimentConfig, out: &Path) -> Result<HeatmapMatrix> {
    let heatmap = if config.evals == 0 {
        let probe = ExperimentConfig {
            evals: 2,
            ..config.clone()
        };
        probe.validate()?;
        let dataset = config.load_dataset()?;
        conditional_heatmap(&init_model(dataset.feature_count())?)
    } else {
        config.validate()?;
        let dataset = config.load_dataset()?;
        let results = run_replicates(&dataset, &config.run_config(), config.seed, config.runs)?;
        heatmap_of(&results)?
    };
    write_atomic(out, &heatmap.to_csv_string())?;
    Ok(heatmap)
}

#[derive(Clone, Debug)]
pub struct SynthArgs {
    pub seed: u64,
    pub samples: usize,
    pub noise: f64,
    pub features: usize,
    pub out: PathBuf,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    if args.features < 10 {
        return Err(CliError::Usage("--features must be at least 10".into()));
    }
    if !(0.0..=0.5).contains(&args.noise) {
        return Err(CliError::Usage("--noise must lie in [0, 0.5]".into()));
    }
    let mut src = RandomSource::new(args.seed);
    let ds = if args.features == 10 {
        generate_synthetic(&mut src, args.samples, args.noise)?
    } else {
        generate_wide_synthetic(&mut src, args.samples, args.features, args.noise)?
    };
    write_atomic(&args.out, &ds.to_csv_string())
}

#[derive(Clone, Debug)]
pub enum StatsInput {
    Table(PathBuf),
    Reports(Vec<PathBuf>),
}

#[derive(Clone, Debug)]
pub struct StatsArgs {
    pub input: StatsInput,
    pub metric: String,
    pub higher_is_better: bool,
    pub out: Option<PathBuf>,
}

pub fn cmd_stats(args: &StatsArgs) -> Result<StatsReport> {
    let (table, metric) = match &args.input {
        StatsInput::Table(path) => (ScoreTable::load_csv(path)?, None),
        StatsInput::Reports(paths) => {
            let mut reports = Vec::with_capacity(paths.len());
            for path in paths {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                let report = Report::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                reports.push((name, report));
            }
            (
                ScoreTable::from_reports(&reports, &args.metric)?,
                Some(args.metric.as_str()),
            )
        }
    };
    let report = StatsReport::build(&table, metric, args.higher_is_better)?;
    match &args.out {
        Some(path) => write_atomic(path, &report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    Ok(report)
}
