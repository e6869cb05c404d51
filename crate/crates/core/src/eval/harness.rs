//! Cross-validated evaluation of frozen embeddings.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::link::{Combiner, LinkInstances};
use super::logistic::{LogisticConfig, LogisticModel};
use super::metrics::{macro_f, micro_f, pr_auc, roc_auc};
use crate::attention::train_plus;
use crate::embed::{Embeddings, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::MultiViewGraph;
use crate::labels::{Item, LabelSet, TaskKind};
use crate::real::Real;
use crate::walk::PairCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub logistic: LogisticConfig,
    pub combiner: Combiner,
    /// Folds evaluated in parallel when > 1.
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub train: usize,
    pub test: usize,
    /// Binary tasks only; class 1 is the positive class.
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
    pub micro_f: f64,
    pub macro_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
    pub micro_f: f64,
    pub macro_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: TaskKind,
    pub num_items: usize,
    pub num_classes: usize,
    pub num_folds: usize,
    pub folds: Vec<FoldMetrics>,
    pub mean: MeanMetrics,
    pub config: serde_json::Value,
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

impl EvalReport {
    fn from_folds(labels: &LabelSet, folds: Vec<FoldMetrics>, config: serde_json::Value) -> Self {
        let opt = |f: fn(&FoldMetrics) -> Option<f64>| -> Option<f64> {
            let v: Option<Vec<f64>> = folds.iter().map(f).collect();
            v.map(|v| mean_of(v.into_iter()))
        };
        let mean = MeanMetrics {
            roc_auc: opt(|f| f.roc_auc),
            pr_auc: opt(|f| f.pr_auc),
            micro_f: mean_of(folds.iter().map(|f| f.micro_f)),
            macro_f: mean_of(folds.iter().map(|f| f.macro_f)),
        };
        EvalReport {
            task: labels.task,
            num_items: labels.len(),
            num_classes: labels.num_classes(),
            num_folds: labels.num_folds,
            folds,
            mean,
            config,
        }
    }

    pub const CSV_HEADER: &'static str = "task,items,classes,folds,roc_auc,pr_auc,micro_f,macro_f";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let task = serde_json::to_value(self.task).expect("serializable");
        format!(
            "{},{},{},{},{},{},{},{}",
            task.as_str().unwrap_or_default(),
            self.num_items,
            self.num_classes,
            self.num_folds,
            opt(self.mean.roc_auc),
            opt(self.mean.pr_auc),
            self.mean.micro_f,
            self.mean.macro_f
        )
    }

    pub fn save(&self, json_path: &Path, csv_path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(json_path, json).map_err(|e| Error::io(json_path, e))?;
        let mut f = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        writeln!(f, "{}\n{}", Self::CSV_HEADER, self.csv_row()).map_err(|e| Error::io(csv_path, e))
    }
}

/// Row-major features for every labeled item.
pub fn item_features<T: Real>(
    emb: &Embeddings<T>,
    labels: &LabelSet,
    combiner: Combiner,
) -> Result<(Vec<f64>, usize)> {
    let dim = match labels.task {
        TaskKind::NodeClass => emb.dim,
        TaskKind::PairClass => combiner.output_dim(emb.dim),
    };
    let row = |i: usize| -> Result<Vec<f64>> {
        if i >= emb.len() {
            return Err(Error::Invalid(format!("node index {i} has no embedding")));
        }
        Ok(emb.row(i).iter().map(|x| x.as_f64()).collect())
    };
    let mut x = Vec::with_capacity(labels.len() * dim);
    for item in &labels.items {
        match (*item, labels.task) {
            (Item::Node(i), TaskKind::NodeClass) => x.extend(row(i)?),
            (Item::Pair(i, j), TaskKind::PairClass) => combiner.combine(&row(i)?, &row(j)?, &mut x),
            _ => {
                return Err(Error::Invalid(format!(
                    "item {item:?} does not match task {:?}",
                    labels.task
                )))
            }
        }
    }
    Ok((x, dim))
}

/// Fits on the training split of `fold` and scores the held-out split.
fn score_fold(
    train_x: &[f64],
    test_x: &[f64],
    dim: usize,
    labels: &LabelSet,
    fold: usize,
    cfg: &LogisticConfig,
) -> Result<FoldMetrics> {
    let train = labels.train_indices(fold);
    let test = labels.test_indices(fold);
    let y_train: Vec<usize> = train.iter().map(|&k| labels.classes[k]).collect();
    let y_test: Vec<usize> = test.iter().map(|&k| labels.classes[k]).collect();
    if y_train.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::SingleClassFold { fold });
    }
    let model = LogisticModel::fit(train_x, dim, &y_train, labels.num_classes(), cfg)?;
    let probs: Vec<Vec<f64>> = test_x
        .chunks_exact(dim)
        .map(|r| model.predict_proba(r))
        .collect();
    let pred: Vec<usize> = probs
        .iter()
        .map(|p| (0..p.len()).fold(0, |b, c| if p[c] > p[b] { c } else { b }))
        .collect();
    let (roc, pr) = if labels.num_classes() == 2 {
        let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
        let truth: Vec<bool> = y_test.iter().map(|&c| c == 1).collect();
        let ctx = |e: Error| Error::Metric(format!("fold {fold}: {e}"));
        (
            Some(roc_auc(&scores, &truth).map_err(ctx)?),
            Some(pr_auc(&scores, &truth).map_err(ctx)?),
        )
    } else {
        (None, None)
    };
    Ok(FoldMetrics {
        fold,
        train: train.len(),
        test: test.len(),
        roc_auc: roc,
        pr_auc: pr,
        micro_f: micro_f(&pred, &y_test, labels.num_classes()),
        macro_f: macro_f(&pred, &y_test, labels.num_classes()),
    })
}

fn rows(x: &[f64], dim: usize, idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .flat_map(|&k| x[k * dim..(k + 1) * dim].iter().copied())
        .collect()
}

fn run_folds<F>(num_folds: usize, threads: usize, f: F) -> Result<Vec<FoldMetrics>>
where
    F: Fn(usize) -> Result<FoldMetrics> + Sync,
{
    if threads <= 1 {
        return (0..num_folds).map(f).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..num_folds)
            .map(|k| {
                let f = &f;
                s.spawn(move || f(k))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    })
}

/// Logistic regression with the label set's folds on a fixed feature matrix.
pub fn logistic_cv(
    x: &[f64],
    dim: usize,
    labels: &LabelSet,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    assert_eq!(x.len(), labels.len() * dim, "feature matrix shape");
    let folds = run_folds(labels.num_folds, cfg.threads, |k| {
        let train = rows(x, dim, &labels.train_indices(k));
        let test = rows(x, dim, &labels.test_indices(k));
        score_fold(&train, &test, dim, labels, k, &cfg.logistic)
    })?;
    let config = serde_json::json!({ "eval": cfg });
    Ok(EvalReport::from_folds(labels, folds, config))
}

pub fn evaluate_embeddings<T: Real>(
    emb: &Embeddings<T>,
    labels: &LabelSet,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let (x, dim) = item_features(emb, labels, cfg.combiner)?;
    logistic_cv(&x, dim, labels, cfg)
}

/// Link-prediction instances as a binary pair-classification label set.
pub fn link_label_set(inst: &LinkInstances, num_folds: usize, seed: u64) -> Result<LabelSet> {
    let items = inst.pairs.iter().map(|&(a, b)| Item::Pair(a, b)).collect();
    let classes = inst
        .labels
        .iter()
        .map(|&l| u8::from(l).to_string())
        .collect();
    Ok(LabelSet::new(TaskKind::PairClass, items, classes, num_folds, seed)?.0)
}

/// Cross-validation for the supervised model: each fold retrains with the
/// labels of its training folds only, then scores the attention embeddings.
pub fn evaluate_plus<T: Real>(
    graph: &MultiViewGraph,
    corpus: &PairCorpus,
    labels: &LabelSet,
    train_cfg: &TrainConfig,
    gamma: f64,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let folds = run_folds(labels.num_folds, cfg.threads, |k| {
        let train_idx = labels.train_indices(k);
        let out = train_plus::<T>(graph, corpus, &labels.subset(&train_idx), train_cfg, gamma)?;
        let (emb, _) = out.embeddings(graph.names());
        let (x, dim) = item_features(&emb, labels, cfg.combiner)?;
        let train = rows(&x, dim, &train_idx);
        let test = rows(&x, dim, &labels.test_indices(k));
        score_fold(&train, &test, dim, labels, k, &cfg.logistic)
    })?;
    let config = serde_json::json!({ "eval": cfg, "train": train_cfg, "gamma": gamma });
    Ok(EvalReport::from_folds(labels, folds, config))
}
