//! Command-line front end. See `latent-ties --help`.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use latent_ties::graph::ThresholdRule;
use latent_ties::store::DEFAULT_BIN_SECONDS;
use latent_ties::temporal::{AutocorrConfig, LagWindow, DEFAULT_TAU_MAX};

#[derive(Debug, Parser)]
#[command(name = "latent-ties", version, about = "Infer latent friendship ties from co-play logs")]
#[command(after_help = "Every flag may also be set through an environment variable named \
LATENT_TIES_<FLAG>, e.g. LATENT_TIES_TAU_MAX=504.")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random choice (world, splits, permutations, folds).
    #[arg(long, global = true, env = "LATENT_TIES_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; never changes any output.
    #[arg(long, global = true, env = "LATENT_TIES_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Largest lag, in bins, summed by the autocorrelation score.
    #[arg(long, global = true, env = "LATENT_TIES_TAU_MAX", default_value_t = DEFAULT_TAU_MAX,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub tau_max: u32,
    #[arg(long, global = true, env = "LATENT_TIES_BIN_SECONDS", default_value_t = DEFAULT_BIN_SECONDS,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub bin_seconds: u32,
    /// Cross-validation folds for tree pruning.
    #[arg(long, global = true, env = "LATENT_TIES_FOLDS", default_value_t = 10,
          value_parser = clap::value_parser!(u16).range(2..))]
    pub folds: u16,
    /// Random train/test permutations per robustness bin.
    #[arg(long, global = true, env = "LATENT_TIES_PERMUTATIONS", default_value_t = 10,
          value_parser = clap::value_parser!(u16).range(1..))]
    pub permutations: u16,
    /// Smoothing added to the inferred degree distribution before KL.
    #[arg(long, global = true, env = "LATENT_TIES_EPSILON_KL", default_value_t = latent_ties::infer::DEFAULT_EPSILON)]
    pub epsilon_kl: f64,
    #[arg(long, global = true, env = "LATENT_TIES_THRESHOLD_RULE", value_enum, default_value_t = Rule::Under)]
    pub threshold_rule: Rule,
}

impl Common {
    pub fn autocorr(&self) -> AutocorrConfig {
        AutocorrConfig {
            lags: LagWindow::UpTo(self.tau_max),
            ..AutocorrConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// Match the survey degree distribution by KL divergence.
    Under,
    /// Smallest threshold keeping every degree within the survey maximum.
    Over,
}

impl Rule {
    pub fn threshold_rule(self) -> ThresholdRule {
        match self {
            Rule::Under => ThresholdRule::Undersampled,
            Rule::Over => ThresholdRule::Oversampled,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic world: event log, labels and ground truth.
    Synth(commands::SynthArgs),
    /// Validate an event log and write it back in canonical order.
    Ingest(commands::IngestArgs),
    /// Compute the nine pair features for every co-player of the focal players.
    Features(commands::FeaturesArgs),
    /// Fit single-feature logistic models and a pruned classification tree.
    Train(commands::TrainArgs),
    /// Held-out AUC table, ROC curves and feature-set tree comparison.
    Eval(commands::EvalArgs),
    /// AUC by rater activity bin over random permutations.
    Robustness(commands::RobustnessArgs),
    /// Choose an autocorrelation threshold and materialize the inferred graph.
    Infer(commands::InferArgs),
    /// Degree, clustering and component statistics of an edge list.
    Graphstats(commands::GraphstatsArgs),
    /// synth, features, train, eval, robustness, infer and graphstats in one run.
    Pipeline(commands::PipelineArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn numeric(err: impl std::fmt::Display) -> Self {
        CliError::Numeric(err.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input { .. } => 2,
            CliError::Numeric(_) => 3,
        }
    }
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
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(usize::from(n)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let c = &cli.common;
    let result = match &cli.command {
        Command::Synth(a) => commands::synth(a, c),
        Command::Ingest(a) => commands::ingest(a, c),
        Command::Features(a) => commands::features(a, c),
        Command::Train(a) => commands::train(a, c),
        Command::Eval(a) => commands::eval(a, c),
        Command::Robustness(a) => commands::robustness(a, c),
        Command::Infer(a) => commands::infer(a, c),
        Command::Graphstats(a) => commands::graphstats(a, c),
        Command::Pipeline(a) => commands::pipeline(a, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
