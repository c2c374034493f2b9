//! `readtime`: command-line driver for the reading-time pipeline.
//!
//! Each subcommand is one stage. Stages read their inputs from and write
//! their outputs to directories, so any stage can be rerun on its own.

mod config;
mod ingest;
mod stages;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "readtime", version, about = "Per-message reading time and read level from browser interaction logs")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Maximum worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus.
    Simulate {
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert CSV exports into a canonical corpus using the `[ingest]` mapping.
    Ingest {
        /// Directory the mapping's relative paths are resolved against
        /// (defaults to the config file's directory).
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build per-timestamp and per-session feature matrices from a corpus.
    Features {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train every estimator for every cross-validation round.
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        select: Selection,
    },
    /// Score trained estimators on each round's held-out user.
    Evaluate {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also score the gaze labels themselves as an estimator.
        #[arg(long)]
        oracle: bool,
        /// Write per-row predictions under `predictions/`.
        #[arg(long)]
        write_predictions: bool,
    },
    /// Paired tests between models, grouped by research question.
    Compare {
        #[arg(long)]
        evaluation: Option<PathBuf>,
        /// Defaults to the evaluation directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a human-readable summary of an evaluation.
    Report {
        #[arg(long)]
        evaluation: Option<PathBuf>,
    },
    /// List the feature columns of both matrix schemas.
    Schema,
}

#[derive(Debug, Args)]
struct Selection {
    /// Comma-separated estimator kinds; overrides `estimators`.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Overrides `cv.rounds`.
    #[arg(long)]
    rounds: Option<usize>,
}

/// Writes a text file, creating parent directories.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    write_text(path, &(text + "\n"))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Command::Simulate { seed: Some(seed), .. } = &cli.command {
        config.seed = *seed;
    }
    if let Command::Train { select, .. } = &cli.command {
        if let Some(names) = &select.estimators {
            config.estimators = names
                .iter()
                .map(|n| readtime::estimators::EstimatorKind::parse(n.trim()))
                .collect::<readtime::error::Result<_>>()
                .context("--estimators")?;
        }
        if select.rounds.is_some() {
            config.cv.rounds = select.rounds;
        }
    }
    let config = config.resolve()?;
    let pick = |flag: &Option<PathBuf>, default: &PathBuf| flag.clone().unwrap_or_else(|| default.clone());
    let paths = config.paths.clone();
    match &cli.command {
        Command::Simulate { out, .. } => stages::simulate(&config, &pick(out, &paths.corpus)),
        Command::Ingest { base, out } => {
            let base = base
                .clone()
                .or_else(|| cli.config.as_deref().and_then(Path::parent).map(Path::to_path_buf))
                .unwrap_or_default();
            stages::ingest(&config, &base, &pick(out, &paths.corpus))
        }
        Command::Features { corpus, out } => {
            stages::features(&config, &pick(corpus, &paths.corpus), &pick(out, &paths.features))
        }
        Command::Train { features, out, .. } => {
            stages::train(&config, &pick(features, &paths.features), &pick(out, &paths.models))
        }
        Command::Evaluate { features, models, out, oracle, write_predictions } => stages::evaluate(
            &config,
            &pick(features, &paths.features),
            &pick(models, &paths.models),
            &pick(out, &paths.evaluation),
            *oracle,
            *write_predictions,
        ),
        Command::Compare { evaluation, out } => {
            let evaluation = pick(evaluation, &paths.evaluation);
            let out = out.clone().unwrap_or_else(|| evaluation.clone());
            stages::compare(&config, &evaluation, &out)
        }
        Command::Report { evaluation } => stages::report(&pick(evaluation, &paths.evaluation)),
        Command::Schema => {
            print!("{}", stages::schema_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
