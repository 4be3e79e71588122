use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edafs_cli::commands::{cmd_heatmap, cmd_run, cmd_stats, cmd_synth, StatsArgs, StatsInput, SynthArgs};
use edafs_cli::config::ExperimentConfig;
use edafs_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "edafs", version, about = "Feature selection with an interaction-aware EDA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run independent replicates and write a JSON report.
    Run(ExperimentArgs),
    /// Write the synthetic correlated benchmark as CSV.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 250)]
        samples: usize,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        /// 10 for the base benchmark, more for the widened variant.
        #[arg(long, default_value_t = 10)]
        features: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average the learned conditional heatmap over many runs.
    Heatmap(ExperimentArgs),
    /// Wilcoxon, Friedman and average ranks over a score table.
    Stats {
        /// CSV: dataset name, then one column per method.
        #[arg(long, conflicts_with = "reports", required_unless_present = "reports")]
        table: Option<PathBuf>,
        /// Run reports, one per method; runs are paired by index.
        #[arg(long, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = "acc_pdf")]
        metric: String,
        /// Treat smaller scores as better.
        #[arg(long)]
        lower_is_better: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// CSV path, `synthetic`, or `synthetic:<features>`.
    #[arg(long, default_value = "synthetic")]
    dataset: String,
    /// Label column name or 0-based index (default: last column).
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Replicates; defaults to 10 for `run` and 100 for `heatmap`.
    #[arg(long)]
    runs: Option<usize>,
    /// Fitness evaluations per run (two per iteration).
    #[arg(long, default_value_t = 500)]
    evals: usize,
    #[arg(long, default_value_t = 0.01)]
    change_factor: f64,
    #[arg(long, default_value_t = 2)]
    strong_mult: u32,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// `holdout` or `paper-mirror`.
    #[arg(long, default_value = "holdout")]
    protocol: String,
    /// `previous-winner` or `best-so-far`.
    #[arg(long, default_value = "previous-winner")]
    gate: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    heatmap_out: Option<PathBuf>,
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn into_config(self, default_runs: usize) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            dataset: self.dataset,
            label: self.label,
            seed: self.seed,
            runs: self.runs.unwrap_or(default_runs),
            evals: self.evals,
            change_factor: self.change_factor,
            strong_mult: self.strong_mult,
            k: self.k,
            protocol: self.protocol.parse()?,
            gate: self.gate.parse()?,
            out: self.out,
            heatmap_out: self.heatmap_out,
            trajectory_out: self.trajectory_out,
        })
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let config = args.into_config(10)?;
            let report = cmd_run(&config)?;
            let agg = &report.aggregate;
            eprintln!(
                "{} runs: mean size {:.2}, best size {}, mean accuracy {:.4}, mean acc_pdf {:.4}",
                agg.runs, agg.mean_subset_size, agg.best_subset_size, agg.mean_accuracy, agg.mean_acc_pdf
            );
        }
        Command::Heatmap(mut args) => {
            let out = args
                .out
                .take()
                .ok_or_else(|| CliError::Usage("heatmap needs --out".into()))?;
            let config = args.into_config(100)?;
            cmd_heatmap(&config, &out)?;
        }
        Command::Synth {
            seed,
            samples,
            noise,
            features,
            out,
        } => {
            cmd_synth(&SynthArgs {
                seed,
                samples,
                noise,
                features,
                out,
            })?;
        }
        Command::Stats {
            table,
            reports,
            metric,
            lower_is_better,
            out,
        } => {
            let input = match table {
                Some(path) => StatsInput::Table(path),
                None => StatsInput::Reports(reports),
            };
            cmd_stats(&StatsArgs {
                input,
                metric,
                higher_is_better: !lower_is_better,
                out,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
