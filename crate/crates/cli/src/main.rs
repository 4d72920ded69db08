use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use oxiscreen::config::RunConfig;
use oxiscreen::learn::ClassifierKind;
use oxiscreen::pipeline::{ModelKind, Tiling};

mod commands;
mod output;

/// Overnight oximetry biomarkers and COPD screening.
#[derive(Debug, Parser)]
#[command(name = "oxiscreen", version)]
struct Cli {
    /// Seed for every random draw (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort (manifest, signals, plant log).
    Synth(SynthArgs),
    /// Compute the feature table of a manifest.
    Extract(ExtractArgs),
    /// Rank-sum screening of every column of a feature table.
    Screen(ScreenArgs),
    /// mRMR selection on a feature table.
    Select(SelectArgs),
    /// Nested cross-validation from a manifest.
    TrainEval(TrainEvalArgs),
    /// Collect train-eval summaries into one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// Number of patients.
    #[arg(long)]
    n: Option<usize>,
    /// Profile mix, e.g. `healthy:0.7,copd_like:0.3`.
    #[arg(long)]
    cohort: Option<String>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// model1 | model2 | model3 | model4
    #[arg(long)]
    model: Option<ModelKind>,
    /// train (1 h hop for COPD) or eval (non-overlapping)
    #[arg(long)]
    tiling: Option<Tiling>,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// Feature table written by `extract`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of features to keep (default: the model's size).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainEvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    model: Option<ModelKind>,
    /// lr | rf
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    /// Random-search grid points per outer fold.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// train-eval output directories.
    #[arg(long = "run", required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Synth(a) => {
            if let Some(n) = a.n {
                cfg.synth.n = n;
            }
            if let Some(c) = &a.cohort {
                cfg.synth.cohort = c.clone();
            }
        }
        Command::Extract(a) => {
            if let Some(m) = a.model {
                cfg.model = m;
            }
            if let Some(t) = a.tiling {
                cfg.tiling = t;
            }
        }
        Command::Select(a) => {
            if a.k.is_some() {
                cfg.cv.k = a.k;
            }
        }
        Command::TrainEval(a) => {
            if let Some(m) = a.model {
                cfg.model = m;
            }
            if let Some(c) = a.classifier {
                cfg.classifier = c;
            }
            if let Some(b) = a.budget {
                cfg.cv.budget = b;
            }
        }
        Command::Screen(_) | Command::Report(_) => {}
    }
    Ok(cfg.resolve())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => commands::synth(&cfg, &a.out),
        Command::Extract(a) => commands::extract(&cfg, &a.manifest, &a.out),
        Command::Screen(a) => commands::screen(&cfg, &a.features, &a.out),
        Command::Select(a) => commands::select(&cfg, &a.features, &a.out),
        Command::TrainEval(a) => commands::train_eval(&cfg, &a.manifest, &a.out),
        Command::Report(a) => commands::report(&a.runs, &a.out),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
