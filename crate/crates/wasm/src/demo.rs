use serde::Serialize;

use mvembed::analysis::second_order_ratio;
use mvembed::attention::train_plus;
use mvembed::embed::{train, AdamConfig, TrainConfig};
use mvembed::synth::{generate_synthetic, SynthSpec, Synthetic};
use mvembed::walk::{PairCorpus, WalkConfig};

/// Keeps demo runs responsive on the main thread.
const MAX_NODES: usize = 400;

fn check_nodes(n: usize) -> Result<(), String> {
    if !(10..=MAX_NODES).contains(&n) {
        return Err(format!("num_nodes must be between 10 and {MAX_NODES}"));
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RatioPoint {
    copy: f64,
    expected: f64,
    measured: Option<f64>,
    edges: Vec<usize>,
}

pub fn ratio_sweep(
    num_nodes: usize,
    p_intra: f64,
    p_inter: f64,
    p_noise: f64,
    steps: usize,
    seed: u64,
) -> Result<String, String> {
    if num_nodes < 10 || num_nodes > 2000 {
        return Err("num_nodes must be between 10 and 2000".into());
    }
    let steps = steps.clamp(2, 50);
    let mut points = Vec::with_capacity(steps);
    for k in 0..steps {
        let copy = k as f64 / (steps - 1) as f64;
        let spec = SynthSpec::copy_model(num_nodes, 2, p_intra, p_inter, copy, p_noise, seed);
        let s = generate_synthetic(&spec, 2).map_err(|e| e.to_string())?;
        points.push(RatioPoint {
            copy,
            expected: spec.expected_ratio(1),
            measured: second_order_ratio(&s.graph, 0, 1).value(),
            edges: s.graph.edge_counts().to_vec(),
        });
    }
    to_json(&points)
}

pub struct LossDemo {
    pub num_nodes: usize,
    pub copy: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

fn demo_graph(num_nodes: usize, copy: f64, noise: f64, seed: u64) -> Result<Synthetic, String> {
    let p = 8.0 / num_nodes as f64;
    let spec = SynthSpec::copy_model(
        num_nodes,
        2,
        0.8 * p,
        0.2 * p,
        copy,
        noise / num_nodes as f64,
        seed,
    );
    generate_synthetic(&spec, 5).map_err(|e| e.to_string())
}

fn demo_config(dim: usize, epochs: usize, lr: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        dim,
        epochs,
        seed,
        negatives: 5,
        threads: 1,
        adam: AdamConfig {
            lr,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    }
}

pub fn loss_curves(d: &LossDemo) -> Result<String, String> {
    check_nodes(d.num_nodes)?;
    if d.epochs == 0 || d.epochs > 30 {
        return Err("epochs must be between 1 and 30".into());
    }
    let s = demo_graph(d.num_nodes, d.copy, 2.0, d.seed)?;
    let corpus = PairCorpus::build(
        &s.graph,
        &WalkConfig {
            seed: d.seed,
            ..WalkConfig::default()
        },
        1,
    )
    .map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        alpha: d.alpha,
        beta: d.beta,
        ..demo_config(d.dim, d.epochs, d.lr, d.seed)
    };
    let out = train::<f32>(&s.graph, &corpus, &cfg).map_err(|e| e.to_string())?;
    to_json(&out.trace.0)
}

#[derive(Serialize)]
struct AttentionDemo {
    /// Mean weight per view.
    mean: Vec<f64>,
    /// Per-node weights with the node's community.
    nodes: Vec<(usize, Vec<f64>)>,
    supervised_loss: Vec<f64>,
}

pub fn attention_weights(
    num_nodes: usize,
    signal: f64,
    gamma: f64,
    epochs: usize,
    seed: u64,
) -> Result<String, String> {
    check_nodes(num_nodes)?;
    if epochs == 0 || epochs > 30 {
        return Err("epochs must be between 1 and 30".into());
    }
    // view 1 keeps a `signal` share of view 0's edges and adds uniform noise
    let s = demo_graph(num_nodes, signal, 6.0, seed)?;
    let corpus = PairCorpus::build(
        &s.graph,
        &WalkConfig {
            seed,
            ..WalkConfig::default()
        },
        1,
    )
    .map_err(|e| e.to_string())?;
    let cfg = demo_config(16, epochs, 0.01, seed);
    let out =
        train_plus::<f32>(&s.graph, &corpus, &s.labels, &cfg, gamma).map_err(|e| e.to_string())?;
    let (_, weights) = out.embeddings(s.graph.names());
    let views = s.graph.num_views();
    let mut mean = vec![0.0; views];
    for w in &weights {
        for (m, x) in mean.iter_mut().zip(w) {
            *m += f64::from(*x) / weights.len() as f64;
        }
    }
    let nodes = weights
        .iter()
        .zip(&s.communities)
        .map(|(w, &c)| (c, w.iter().map(|&x| f64::from(x)).collect()))
        .collect();
    to_json(&AttentionDemo {
        mean,
        nodes,
        supervised_loss: out.att_trace,
    })
}
