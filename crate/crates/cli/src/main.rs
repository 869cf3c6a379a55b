//! `fundus`: synthesize, preprocess, split, train, evaluate and infer.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable giving the default worker thread count.
pub const THREADS_ENV: &str = "FUNDUS_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self { code: 1, message: msg.to_string() }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Self { code: 2, message: msg.to_string() }
    }
}

impl From<fundus_core::Error> for CliError {
    fn from(e: fundus_core::Error) -> Self {
        match e {
            fundus_core::Error::InvalidParameter(_) => CliError::usage(e),
            _ => CliError::data(e),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fundus", version, about = "Fundus photograph CSC screening pipeline")]
struct Cli {
    /// JSON pipeline configuration; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream; overrides seeds in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: $FUNDUS_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labeled fundus dataset.
    Synth(SynthArgs),
    /// Detect the FOV, equalize, mask, crop and resize every image.
    Preprocess(PreprocessArgs),
    /// Assign train/val/test splits.
    Split(SplitArgs),
    /// Train the classifier on the train split with validation early stopping.
    Train(TrainArgs),
    /// Evaluate a model or a scores file, optionally against raters.
    Eval(EvalArgs),
    /// Print the CSC probability for raw photographs.
    Infer(InferArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Images per class.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Side length of the generated photographs.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Render each positive from the same scene as its negative partner.
    #[arg(long)]
    pub paired: bool,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Output side length [default: 299].
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output manifest (default: overwrite the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Train, validation and test fractions, e.g. `0.8,0.1,0.1`.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Split the whole set at once instead of per class.
    #[arg(long)]
    pub no_stratify: bool,
    /// Keep rows that already have a split; only assign the rest.
    #[arg(long)]
    pub respect_existing: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Per-epoch history CSV (default: next to the model).
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Disable training-time augmentation.
    #[arg(long)]
    pub no_augment: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Trained model; requires --manifest.
    #[arg(long, requires = "manifest", conflicts_with = "scores")]
    pub model: Option<PathBuf>,
    /// Preprocessed manifest; the test split is evaluated.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Evaluate every row instead of only the test split.
    #[arg(long)]
    pub all_rows: bool,
    /// Precomputed `case_id,score,label` file instead of a model.
    #[arg(long, required_unless_present = "model")]
    pub scores: Option<PathBuf>,
    /// `case_id,label` file of a human rater; repeatable.
    #[arg(long = "rater")]
    pub raters: Vec<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Report JSON output.
    #[arg(long)]
    pub report: PathBuf,
    /// ROC CSV output (default: next to the report).
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Write per-case model scores here.
    #[arg(long)]
    pub scores_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Raw fundus photographs.
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| CliError::usage(format!("{THREADS_ENV}={v} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::usage("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError { code: 3, message: e.to_string() })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let mut cfg = match &cli.config {
        Some(p) => config::PipelineConfig::load(p)?,
        None => config::PipelineConfig::default(),
    };
    cfg.apply_seed(cli.seed);
    match cli.command {
        Command::Synth(a) => commands::synth(&cfg, &a),
        Command::Preprocess(a) => commands::preprocess(&cfg, &a),
        Command::Split(a) => commands::split(&cfg, &a),
        Command::Train(a) => commands::train(&cfg, &a),
        Command::Eval(a) => commands::eval(&cfg, &a),
        Command::Infer(a) => commands::infer(&cfg, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
