use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod manifest;

use config::{CombinerArg, Task, TrainFlags};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration; exit code 2.
    User(String),
    /// Numerical failure or bug; exit code 1.
    Internal(String),
}

impl From<mvembed::Error> for CliError {
    fn from(e: mvembed::Error) -> Self {
        if e.is_user_error() {
            CliError::User(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mvembed",
    version,
    about = "Multi-view collaborative network embedding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Edge list per view (tab-separated `src dst`), comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub views: Vec<PathBuf>,
    /// Node-map sidecar (`name<TAB>index`); when given, unknown names are errors
    #[arg(long)]
    pub nodes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with default parameters; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-view link co-occurrence ratios
    Analyze {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train MANE embeddings
    Train {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        flags: TrainFlags,
        #[command(flatten)]
        run: RunArgs,
        /// Also write raw little-endian f32 embeddings with a JSON sidecar
        #[arg(long)]
        binary: bool,
        /// Also write the random-walk corpus
        #[arg(long)]
        dump_walks: bool,
    },
    /// Train MANE+ (attention over views, supervised by labels)
    TrainPlus {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        flags: TrainFlags,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        labels: LabelArgs,
        /// Weight of the supervised loss; defaults to 1000, or 0.1 for heavily skewed labels
        #[arg(long)]
        gamma: Option<f64>,
        /// Also cross-validate, retraining on each fold's training labels
        #[arg(long)]
        cv: bool,
    },
    /// Cross-validated logistic regression on embeddings
    Eval {
        /// Embedding text file; alternatively train from --views
        #[arg(long, conflicts_with = "views", required_unless_present = "views")]
        embeddings: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        views: Vec<PathBuf>,
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[command(flatten)]
        flags: TrainFlags,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        labels: LabelArgs,
        /// Negatives per positive pair for --task link
        #[arg(long)]
        neg_ratio: Option<usize>,
    },
    /// Write a synthetic multi-view graph with planted communities
    Generate(commands::GenerateArgs),
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// `node<TAB>class`, `src<TAB>dst<TAB>class`, or for --task link `src<TAB>dst`
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_enum, default_value = "node")]
    pub task: Task,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Pair feature combiner
    #[arg(long, value_enum)]
    pub combiner: Option<CombinerArg>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { input, run } => commands::analyze(&input, &run),
        Command::Train {
            input,
            flags,
            run,
            binary,
            dump_walks,
        } => commands::train(&input, &flags, &run, binary, dump_walks),
        Command::TrainPlus {
            input,
            flags,
            run,
            labels,
            gamma,
            cv,
        } => commands::train_plus(&input, &flags, &run, &labels, gamma, cv),
        Command::Eval {
            embeddings,
            views,
            nodes,
            flags,
            run,
            labels,
            neg_ratio,
        } => {
            let source = match embeddings {
                Some(path) => commands::EmbeddingSource::File(path),
                None => commands::EmbeddingSource::Train(GraphInput { views, nodes }, flags),
            };
            commands::eval(source, &run, &labels, neg_ratio)
        }
        Command::Generate(args) => commands::generate(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MVEMBED_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
