//! Multi-view collaborative network embedding.
//!
//! Each view of a multiplex graph gets its own skip-gram embedding trained on
//! random-walk pairs, while two collaboration losses tie the views together:
//! one aligns a node's vectors across views, the other pulls a node's vector in
//! one view toward its neighbors' context vectors from another. An optional
//! attention layer learns per-node view weights from labels.

pub mod analysis;
pub mod attention;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod labels;
pub mod real;
pub mod rng;
pub mod synth;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{load_graph, MultiViewGraph, NodeMapPolicy, NodeNames};
pub use real::Real;
