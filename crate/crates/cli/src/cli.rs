use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "p2gt", version, about = "Multi-axis event process typing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, describe and split typed-process datasets.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Train the gloss-grounded model.
    Train(RunArgs),
    /// Label index operations.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Evaluate a trained model on a split.
    Eval(EvalArgs),
    /// Rank action and object labels for processes.
    Type(TypeArgs),
    /// Sequence-to-label baselines.
    #[command(subcommand)]
    Baseline(BaselineCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnotatorChoice {
    /// Built-in rule annotators.
    Rules,
    /// Precomputed frames from a JSONL table (`--frames`).
    External,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Turn article JSONL files into a typed-process dataset.
    Build {
        /// Directory of article `*.jsonl` files.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "rules")]
        annotator: AnnotatorChoice,
        /// Frame table for the external annotator.
        #[arg(long, required_if_eq("annotator", "external"))]
        frames: Option<PathBuf>,
    },
    /// Label frequency and external-label statistics.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded train/dev/test split.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Run config; falls back to the file named by P2GT_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    /// Encode the glosses of the full label vocabulary.
    Build {
        #[command(flatten)]
        run: RunArgs,
        /// Checkpoint directory (default: <output>/checkpoint).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitChoice {
    Train,
    Dev,
    Test,
}

impl SplitChoice {
    pub fn name(self) -> &'static str {
        match self {
            SplitChoice::Train => "train",
            SplitChoice::Dev => "dev",
            SplitChoice::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BucketChoice {
    Freq,
    Length,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct EvalOptions {
    #[arg(long, value_enum)]
    pub split: Option<SplitChoice>,
    #[arg(long, value_enum)]
    pub buckets: Option<BucketChoice>,
    /// Recall cutoffs, e.g. `1,10`.
    #[arg(long)]
    pub k: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Index directory (default: <output>/index).
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalOptions,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["process", "file"]))]
pub struct TypeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// A process as `pred|obj ;; pred|obj ;; ...`.
    #[arg(long)]
    pub process: Option<String>,
    /// File with one process per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindChoice {
    Mean,
    Rnn,
    Ctx,
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        kind: Option<KindChoice>,
    },
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        kind: Option<KindChoice>,
        /// Baseline checkpoint (default: <output>/baseline-<kind>).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        eval: EvalOptions,
    },
}
