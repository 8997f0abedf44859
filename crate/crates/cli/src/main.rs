//! `psynet` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 estimation failure.

mod commands;
mod config;
mod manifest;
mod plot;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use psynet::bootstrap::{BootstrapKind, Statistic, SubsetKind};
use psynet::simgen::Study;
use psynet::{CorrelationMethod, EstimationOptions, Estimator, MissingPolicy};

#[derive(Parser, Debug)]
#[command(name = "psynet", version, about = "Partial-correlation networks with bootstrap accuracy and stability checks")]
#[command(args_override_self = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Data file (CSV or tab-separated, header row).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, default_value = "psynet-out")]
    output_dir: PathBuf,
    /// Base seed for all randomness; generated and recorded when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Format of the report printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON file supplying any flag; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Missing {
    Pairwise,
    Listwise,
}

fn core_parse<T: std::str::FromStr<Err = psynet::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: psynet::Error| e.to_string())
}

#[derive(Args, Debug, Clone, Serialize)]
struct EstArgs {
    /// ebicglasso or pcor.
    #[arg(long, default_value = "ebicglasso", value_parser = core_parse::<Estimator>)]
    method: Estimator,
    /// EBIC hyperparameter.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    #[arg(long, default_value_t = 0.01)]
    lambda_min_ratio: f64,
    #[arg(long)]
    penalize_diagonal: bool,
    /// auto, pearson, spearman or polychoric.
    #[arg(long, default_value = "auto", value_parser = core_parse::<CorrelationMethod>)]
    correlation: CorrelationMethod,
    #[arg(long, value_enum, default_value_t = Missing::Pairwise)]
    missing: Missing,
}

impl EstArgs {
    fn options(&self) -> EstimationOptions {
        EstimationOptions {
            estimator: self.method,
            gamma: self.gamma,
            n_lambda: self.n_lambda,
            lambda_min_ratio: self.lambda_min_ratio,
            penalize_diagonal: self.penalize_diagonal,
            correlation_method: self.correlation,
            ..EstimationOptions::default()
        }
    }

    fn missing_policy(&self) -> MissingPolicy {
        match self.missing {
            Missing::Pairwise => MissingPolicy::Pairwise,
            Missing::Listwise => MissingPolicy::Listwise,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a network; writes edges, matrices, provenance and centrality.
    Estimate(EstimateArgs),
    /// Centrality indices for a data file or a saved network.
    Centrality(CentralityArgs),
    /// Nonparametric or parametric bootstrap with edge CIs and difference tests.
    Bootstrap(BootstrapArgs),
    /// Case- or node-dropping bootstrap and the CS-coefficient.
    Stability(StabilityArgs),
    /// One bootstrapped difference test from a saved bootstrap run.
    Difftest(DifftestArgs),
    /// Run one of the simulation studies.
    Simulate(SimulateArgs),
    /// Redraw the figures of a run directory from its CSV files.
    Plot(PlotArgs),
}

impl Command {
    const NAMES: [&'static str; 7] = [
        "estimate",
        "centrality",
        "bootstrap",
        "stability",
        "difftest",
        "simulate",
        "plot",
    ];
}

#[derive(Args, Debug, Clone, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    est: EstArgs,
    /// Skip the network drawing.
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CentralityArgs {
    /// Saved network (network.json or a weights matrix CSV) instead of --input.
    #[arg(long)]
    network: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    est: EstArgs,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BootstrapArgs {
    #[arg(long, default_value_t = 1000)]
    n_boots: usize,
    /// nonparametric or parametric.
    #[arg(long = "type", default_value = "nonparametric", value_parser = core_parse::<BootstrapKind>)]
    #[serde(rename = "type")]
    kind: BootstrapKind,
    /// Level for edge intervals and difference tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    #[serde(flatten)]
    est: EstArgs,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct StabilityArgs {
    /// case or node.
    #[arg(long = "type", default_value = "case", value_parser = core_parse::<SubsetKind>)]
    #[serde(rename = "type")]
    kind: SubsetKind,
    /// Total replicates, split evenly over the drop levels.
    #[arg(long, default_value_t = 1000)]
    n_boots: usize,
    /// Drop proportions in [0, 1), or a single count k for k levels
    /// spaced evenly over [0.1, 0.75].
    #[arg(long, value_delimiter = ',', default_value = "10")]
    drop_levels: Vec<f64>,
    #[arg(long, default_value_t = 0.7)]
    cor_threshold: f64,
    #[arg(long, default_value_t = 0.95)]
    probability: f64,
    #[command(flatten)]
    #[serde(flatten)]
    est: EstArgs,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DifftestArgs {
    /// Output directory of a bootstrap run.
    #[arg(long)]
    run_dir: PathBuf,
    /// edge, strength, closeness or betweenness.
    #[arg(long, default_value = "strength", value_parser = core_parse::<Statistic>)]
    stat: Statistic,
    /// Node (1-based index or label) or edge (`1-2`, `A--B`).
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    /// cs, edge-diff or centrality-diff.
    #[arg(long, value_parser = core_parse::<Study>)]
    study: Study,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n_boots: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sample_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    rewiring: Option<Vec<f64>>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edge_weight: Option<f64>,
    #[arg(long)]
    negative_proportion: Option<f64>,
    /// Ordinal levels of the generated data; 0 keeps it continuous.
    #[arg(long)]
    ordinal_levels: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    drop_levels: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    cor_threshold: Option<f64>,
    #[arg(long)]
    probability: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    est: EstArgs,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PlotArgs {
    /// Run directory to redraw; defaults to --output-dir.
    #[arg(long)]
    run_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args_os().collect(), &Command::NAMES) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(commands::EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
