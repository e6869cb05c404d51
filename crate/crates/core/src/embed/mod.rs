//! View-specific embeddings: parameters, losses, optimizer and training.

pub mod adam;
pub mod exact;
pub mod loss;
pub mod noise;
pub mod tables;
pub mod train;

pub use adam::AdamConfig;
pub use exact::{exact_objective, LossBreakdown};
pub use loss::{
    exact_loss, loss_c1, loss_c2, loss_div, sampled_loss, softmax_distribution, softmax_prob,
    LossGrad, SoftmaxSide, Term,
};
pub use noise::NoiseDist;
pub use tables::{view_dim, EmbeddingTables, Embeddings, Param, Side};
pub use train::{train, EpochLoss, LossTrace, Objective, TrainConfig, TrainOutput, Trainer};
