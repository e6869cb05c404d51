//! Downstream evaluation: logistic regression on frozen embeddings with
//! stratified cross-validation.

pub mod harness;
pub mod link;
pub mod logistic;
pub mod metrics;

pub use harness::{
    evaluate_embeddings, evaluate_plus, item_features, link_label_set, logistic_cv, EvalConfig,
    EvalReport, FoldMetrics, MeanMetrics,
};
pub use link::{build_link_instances, sample_negatives, Combiner, LinkInstances};
pub use logistic::{LogisticConfig, LogisticModel};
pub use metrics::{accuracy, macro_f, micro_f, pr_auc, roc_auc};
