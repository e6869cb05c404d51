//! Parameter resolution: command-line flags, then the config file, then
//! built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use mvembed::embed::{AdamConfig, Objective, TrainConfig};
use mvembed::eval::Combiner;
use mvembed::labels::TaskKind;
use mvembed::walk::WalkConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    None,
    /// alpha = 1, beta = 0
    NoC2,
    /// alpha = beta = 0
    NoC1c2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Node,
    Pair,
    Link,
}

impl Task {
    pub fn kind(self) -> TaskKind {
        match self {
            Task::Node => TaskKind::NodeClass,
            Task::Pair | Task::Link => TaskKind::PairClass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombinerArg {
    Hadamard,
    Concat,
}

impl From<CombinerArg> for Combiner {
    fn from(c: CombinerArg) -> Self {
        match c {
            CombinerArg::Hadamard => Combiner::Hadamard,
            CombinerArg::Concat => Combiner::Concat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F32,
    F64,
}

/// Flags shared by the commands that train embeddings.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    /// Weight of first-order collaboration
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of second-order collaboration
    #[arg(long)]
    pub beta: Option<f64>,
    /// Final embedding dimension, split evenly across views
    #[arg(long)]
    pub dim: Option<usize>,
    /// Negative samples per positive pair
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Nodes per random walk
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long)]
    pub walks_per_node: Option<usize>,
    /// Skip-gram window size
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Worker threads; 1 gives bit-reproducible runs
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exact softmax or negative sampling
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Preset collaboration weights for ablations
    #[arg(long, value_enum)]
    pub ablation: Option<Ablation>,
    /// Largest graph for which the exact epoch loss is computed
    #[arg(long)]
    pub exact_loss_max_nodes: Option<usize>,
    /// Parameter storage precision
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

/// Keys accepted in a `--config` TOML file. All optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub dim: Option<usize>,
    pub negatives: Option<usize>,
    pub walk_length: Option<usize>,
    pub walks_per_node: Option<usize>,
    pub window: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub mode: Option<Mode>,
    pub ablation: Option<Ablation>,
    pub exact_loss_max_nodes: Option<usize>,
    pub precision: Option<Precision>,
    pub folds: Option<usize>,
    pub combiner: Option<CombinerArg>,
    pub neg_ratio: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
    }
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedTrain {
    pub train: TrainConfig,
    pub walk: WalkConfig,
    pub ablation: Ablation,
    pub precision: Precision,
}

pub fn resolve_train(
    flags: &TrainFlags,
    file: &FileConfig,
    seed: Option<u64>,
) -> Result<ResolvedTrain, CliError> {
    let defaults = TrainConfig::default();
    let walk_defaults = WalkConfig::default();
    let seed = seed.or(file.seed).unwrap_or(defaults.seed);
    let ablation = flags.ablation.or(file.ablation).unwrap_or(Ablation::None);
    let (mut alpha, mut beta) = (
        flags.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        flags.beta.or(file.beta).unwrap_or(defaults.beta),
    );
    match ablation {
        Ablation::None => {}
        preset => {
            if flags.alpha.is_some() || flags.beta.is_some() {
                return Err(CliError::User(
                    "--ablation cannot be combined with --alpha or --beta".into(),
                ));
            }
            (alpha, beta) = if preset == Ablation::NoC2 {
                (1.0, 0.0)
            } else {
                (0.0, 0.0)
            };
        }
    }
    let mode = flags.mode.or(file.mode).unwrap_or(Mode::Sampled);
    let train = TrainConfig {
        alpha,
        beta,
        dim: flags.dim.or(file.dim).unwrap_or(defaults.dim),
        negatives: flags
            .negatives
            .or(file.negatives)
            .unwrap_or(defaults.negatives),
        adam: AdamConfig {
            lr: flags.lr.or(file.lr).unwrap_or(defaults.adam.lr),
            ..AdamConfig::default()
        },
        epochs: flags.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        seed,
        objective: match mode {
            Mode::Exact => Objective::ExactSoftmax,
            Mode::Sampled => Objective::NegativeSampling,
        },
        threads: flags.threads.or(file.threads).unwrap_or(defaults.threads),
        exact_loss_max_nodes: flags
            .exact_loss_max_nodes
            .or(file.exact_loss_max_nodes)
            .unwrap_or(defaults.exact_loss_max_nodes),
        early_stop: None,
    };
    let walk = WalkConfig {
        walk_length: flags
            .walk_length
            .or(file.walk_length)
            .unwrap_or(walk_defaults.walk_length),
        walks_per_node: flags
            .walks_per_node
            .or(file.walks_per_node)
            .unwrap_or(walk_defaults.walks_per_node),
        window: flags.window.or(file.window).unwrap_or(walk_defaults.window),
        seed,
    };
    walk.validate().map_err(|e| CliError::User(e.to_string()))?;
    Ok(ResolvedTrain {
        train,
        walk,
        ablation,
        precision: flags.precision.or(file.precision).unwrap_or(Precision::F32),
    })
}

pub fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| {
        CliError::User(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    Ok(dir)
}
