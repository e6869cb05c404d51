//! Per-node view attention and the supervised extension (MANE+).
//!
//! For a node with concatenated embedding `f`, view `v` is scored by
//! `s(v) = z2_v · tanh(z1_v ∘ f + b1_v) + b2_v`, the scores are softmaxed into
//! weights `a_v`, and the attention embedding is
//! `tanh(concat_v a_v · f^(v))`. A linear softmax head on that embedding (or on
//! the elementwise product of two of them, for pair tasks) is trained with
//! cross-entropy jointly with the unsupervised losses.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::embed::adam::{AdamCoefs, LazyAdam, ParamStore};
use crate::embed::tables::{EmbeddingTables, Embeddings, Param};
use crate::embed::train::{LossTrace, TrainConfig, Trainer};
use crate::error::{Error, Result};
use crate::graph::MultiViewGraph;
use crate::labels::{Item, LabelSet, TaskKind};
use crate::real::{dot, Real};
use crate::rng::{self, Stream};
use crate::walk::PairCorpus;

/// Attention and head parameters stored in one flat vector:
/// `z1 (V×D) | z2 (V×D) | b1 (V) | b2 (V) | head weights (C×D) | head bias (C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams<T> {
    num_views: usize,
    dim: usize,
    num_classes: usize,
    data: Vec<T>,
}

impl<T: Real> AttentionParams<T> {
    /// Weights uniform on [-0.1, 0.1], biases zero.
    pub fn init(num_views: usize, dim: usize, num_classes: usize, seed: u64) -> Self {
        let mut p = Self::zeros(num_views, dim, num_classes);
        let mut rng = rng::stream(seed, Stream::AttentionInit, &[]);
        let ranges = [
            p.z1_range(0).start..p.b1_range().start,
            p.w_range(0).start..p.c_range().start,
        ];
        for r in ranges {
            for x in &mut p.data[r] {
                *x = T::lit(rng.gen_range(-0.1..=0.1));
            }
        }
        p
    }

    pub fn zeros(num_views: usize, dim: usize, num_classes: usize) -> Self {
        let len = 2 * num_views * dim + 2 * num_views + num_classes * dim + num_classes;
        AttentionParams {
            num_views,
            dim,
            num_classes,
            data: vec![T::zero(); len],
        }
    }

    pub fn num_views(&self) -> usize {
        self.num_views
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    fn z1_range(&self, v: usize) -> std::ops::Range<usize> {
        v * self.dim..(v + 1) * self.dim
    }
    fn z2_range(&self, v: usize) -> std::ops::Range<usize> {
        let o = self.num_views * self.dim;
        o + v * self.dim..o + (v + 1) * self.dim
    }
    fn b1_range(&self) -> std::ops::Range<usize> {
        let o = 2 * self.num_views * self.dim;
        o..o + self.num_views
    }
    fn b2_range(&self) -> std::ops::Range<usize> {
        let o = 2 * self.num_views * self.dim + self.num_views;
        o..o + self.num_views
    }
    fn w_range(&self, c: usize) -> std::ops::Range<usize> {
        let o = 2 * self.num_views * self.dim + 2 * self.num_views;
        o + c * self.dim..o + (c + 1) * self.dim
    }
    fn c_range(&self) -> std::ops::Range<usize> {
        let o = 2 * self.num_views * self.dim + 2 * self.num_views + self.num_classes * self.dim;
        o..o + self.num_classes
    }

    pub fn z1(&self, v: usize) -> &[T] {
        &self.data[self.z1_range(v)]
    }
    pub fn z2(&self, v: usize) -> &[T] {
        &self.data[self.z2_range(v)]
    }
    pub fn b1(&self, v: usize) -> T {
        self.data[self.b1_range().start + v]
    }
    pub fn b2(&self, v: usize) -> T {
        self.data[self.b2_range().start + v]
    }
    pub fn head_weights(&self, c: usize) -> &[T] {
        &self.data[self.w_range(c)]
    }
    pub fn head_bias(&self, c: usize) -> T {
        self.data[self.c_range().start + c]
    }

    pub fn z1_mut(&mut self, v: usize) -> &mut [T] {
        let r = self.z1_range(v);
        &mut self.data[r]
    }
    pub fn z2_mut(&mut self, v: usize) -> &mut [T] {
        let r = self.z2_range(v);
        &mut self.data[r]
    }
    pub fn set_b1(&mut self, v: usize, x: T) {
        let k = self.b1_range().start + v;
        self.data[k] = x;
    }
    pub fn set_b2(&mut self, v: usize, x: T) {
        let k = self.b2_range().start + v;
        self.data[k] = x;
    }
    pub fn head_weights_mut(&mut self, c: usize) -> &mut [T] {
        let r = self.w_range(c);
        &mut self.data[r]
    }
    pub fn set_head_bias(&mut self, c: usize, x: T) {
        let k = self.c_range().start + c;
        self.data[k] = x;
    }
}

/// Score of view `v` for a node with final embedding `f`.
pub fn attention_score<T: Real>(params: &AttentionParams<T>, f: &[T], v: usize) -> T {
    let b1 = params.b1(v);
    params
        .z2(v)
        .iter()
        .zip(params.z1(v))
        .zip(f)
        .fold(T::zero(), |acc, ((&z2, &z1), &x)| {
            acc + z2 * (z1 * x + b1).tanh()
        })
        + params.b2(v)
}

fn softmax<T: Real>(scores: &[T]) -> Vec<T> {
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scores.iter().map(|&s| (s - max).exp()).collect();
    let z: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Softmax of the view scores.
pub fn attention_weights<T: Real>(params: &AttentionParams<T>, f: &[T]) -> Vec<T> {
    let scores: Vec<T> = (0..params.num_views)
        .map(|v| attention_score(params, f, v))
        .collect();
    softmax(&scores)
}

fn concat_centers<T: Real>(tables: &EmbeddingTables<T>, i: usize) -> Vec<T> {
    (0..tables.num_views())
        .flat_map(|v| tables.center(v, i).iter().copied())
        .collect()
}

/// Attention embedding of node `i`: `tanh(concat_v a_v f_i^(v))`.
pub fn attention_aggregate<T: Real>(
    params: &AttentionParams<T>,
    tables: &EmbeddingTables<T>,
    i: usize,
) -> Vec<T> {
    NodeForward::new(params, tables, i).fa
}

/// Attention embeddings and view weights for every node.
pub fn attention_embeddings<T: Real>(
    params: &AttentionParams<T>,
    tables: &EmbeddingTables<T>,
    names: &crate::graph::NodeNames,
) -> (Embeddings<T>, Vec<Vec<T>>) {
    let mut values = Vec::with_capacity(tables.num_nodes() * params.dim);
    let mut weights = Vec::with_capacity(tables.num_nodes());
    for i in 0..tables.num_nodes() {
        let fw = NodeForward::new(params, tables, i);
        values.extend(fw.fa);
        weights.push(fw.a);
    }
    (
        Embeddings {
            names: names.clone(),
            dim: params.dim,
            values,
        },
        weights,
    )
}

/// Writes `node,view,weight` rows.
pub fn write_attention_csv<T: Real>(
    path: &Path,
    names: &crate::graph::NodeNames,
    view_names: &[String],
    weights: &[Vec<T>],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "node,view,weight").map_err(io)?;
    for (i, w) in weights.iter().enumerate() {
        for (v, a) in w.iter().enumerate() {
            writeln!(out, "{},{},{}", names.name(i), view_names[v], a).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

struct NodeForward<T> {
    f: Vec<T>,
    /// tanh(z1_v ∘ f + b1_v) per view
    hidden: Vec<Vec<T>>,
    a: Vec<T>,
    fa: Vec<T>,
}

impl<T: Real> NodeForward<T> {
    fn new(params: &AttentionParams<T>, tables: &EmbeddingTables<T>, i: usize) -> Self {
        let f = concat_centers(tables, i);
        assert_eq!(
            f.len(),
            params.dim,
            "attention dim does not match embeddings"
        );
        let views = params.num_views;
        let hidden: Vec<Vec<T>> = (0..views)
            .map(|v| {
                let b1 = params.b1(v);
                params
                    .z1(v)
                    .iter()
                    .zip(&f)
                    .map(|(&z, &x)| (z * x + b1).tanh())
                    .collect()
            })
            .collect();
        let scores: Vec<T> = (0..views)
            .map(|v| dot(params.z2(v), &hidden[v]) + params.b2(v))
            .collect();
        let a = softmax(&scores);
        let d = tables.dim();
        let fa = f
            .iter()
            .enumerate()
            .map(|(k, &x)| (a[k / d] * x).tanh())
            .collect();
        NodeForward { f, hidden, a, fa }
    }

    /// Backpropagates `dfa` into attention parameters and into `df`, the
    /// gradient of the concatenated center vectors.
    fn backward(
        &self,
        params: &AttentionParams<T>,
        dfa: &[T],
        grad: &mut [T],
        view_dim: usize,
    ) -> Vec<T> {
        let views = params.num_views;
        let one = T::one();
        let dpre: Vec<T> = dfa
            .iter()
            .zip(&self.fa)
            .map(|(&g, &y)| g * (one - y * y))
            .collect();
        let mut df: Vec<T> = vec![T::zero(); self.f.len()];
        let mut da = vec![T::zero(); views];
        for v in 0..views {
            let block = v * view_dim..(v + 1) * view_dim;
            da[v] = dot(&dpre[block.clone()], &self.f[block.clone()]);
            for k in block {
                df[k] = self.a[v] * dpre[k];
            }
        }
        let mean: T = self.a.iter().zip(&da).map(|(&a, &g)| a * g).sum();
        for v in 0..views {
            let ds = self.a[v] * (da[v] - mean);
            let h = &self.hidden[v];
            let z1 = params.z1(v);
            let z2 = params.z2(v);
            let (r1, r2) = (params.z1_range(v), params.z2_range(v));
            let mut db1 = T::zero();
            for k in 0..self.f.len() {
                grad[r2.start + k] = grad[r2.start + k] + ds * h[k];
                let g = ds * z2[k] * (one - h[k] * h[k]);
                grad[r1.start + k] = grad[r1.start + k] + g * self.f[k];
                db1 = db1 + g;
                df[k] = df[k] + g * z1[k];
            }
            let k1 = params.b1_range().start + v;
            let k2 = params.b2_range().start + v;
            grad[k1] = grad[k1] + db1;
            grad[k2] = grad[k2] + ds;
        }
        df
    }
}

/// Cross-entropy of the head on input `x`; accumulates `scale`-weighted head
/// gradients into `grad` and returns (loss, d loss / d x).
fn head_backward<T: Real>(
    params: &AttentionParams<T>,
    x: &[T],
    class: usize,
    scale: T,
    grad: &mut [T],
) -> (f64, Vec<T>) {
    let logits: Vec<T> = (0..params.num_classes)
        .map(|c| dot(params.head_weights(c), x) + params.head_bias(c))
        .collect();
    let p = softmax(&logits);
    let loss = crate::real::log_sum_exp(logits.iter().map(|l| l.as_f64())) - logits[class].as_f64();
    let mut dx = vec![T::zero(); x.len()];
    for c in 0..params.num_classes {
        let d = (p[c] - if c == class { T::one() } else { T::zero() }) * scale;
        let r = params.w_range(c);
        let w = params.head_weights(c);
        for k in 0..x.len() {
            grad[r.start + k] = grad[r.start + k] + d * x[k];
            dx[k] = dx[k] + d * w[k];
        }
        let kb = params.c_range().start + c;
        grad[kb] = grad[kb] + d;
    }
    (loss, dx)
}

/// Loss of one labeled item; accumulates gradients scaled by `scale`.
fn item_grad<T: Real>(
    params: &AttentionParams<T>,
    tables: &EmbeddingTables<T>,
    item: Item,
    class: usize,
    scale: T,
    grad: &mut [T],
    centers: &mut HashMap<usize, Vec<T>>,
) -> f64 {
    let d = tables.dim();
    let mut add_center = |node: usize, df: Vec<T>| {
        let e = centers
            .entry(node)
            .or_insert_with(|| vec![T::zero(); df.len()]);
        for (a, b) in e.iter_mut().zip(df) {
            *a = *a + b;
        }
    };
    match item {
        Item::Node(i) => {
            let fw = NodeForward::new(params, tables, i);
            let (loss, dfa) = head_backward(params, &fw.fa, class, scale, grad);
            add_center(i, fw.backward(params, &dfa, grad, d));
            loss
        }
        Item::Pair(i, j) => {
            let fi = NodeForward::new(params, tables, i);
            let fj = NodeForward::new(params, tables, j);
            let x: Vec<T> = fi.fa.iter().zip(&fj.fa).map(|(&a, &b)| a * b).collect();
            let (loss, dx) = head_backward(params, &x, class, scale, grad);
            let dfi: Vec<T> = dx.iter().zip(&fj.fa).map(|(&g, &b)| g * b).collect();
            let dfj: Vec<T> = dx.iter().zip(&fi.fa).map(|(&g, &a)| g * a).collect();
            add_center(i, fi.backward(params, &dfi, grad, d));
            add_center(j, fj.backward(params, &dfj, grad, d));
            loss
        }
    }
}

/// Mean cross-entropy and its gradients.
#[derive(Debug, Clone)]
pub struct AttLossGrad<T> {
    pub loss: f64,
    /// Same layout as [`AttentionParams`].
    pub params: Vec<T>,
    /// Gradients of center rows, one entry per (view, node) touched.
    pub centers: Vec<(Param, Vec<T>)>,
}

fn split_centers<T: Real>(
    centers: HashMap<usize, Vec<T>>,
    views: usize,
    d: usize,
) -> Vec<(Param, Vec<T>)> {
    let mut nodes: Vec<_> = centers.into_iter().collect();
    nodes.sort_by_key(|(i, _)| *i);
    nodes
        .into_iter()
        .flat_map(|(i, df)| {
            (0..views).map(move |v| (Param::center(v, i), df[v * d..(v + 1) * d].to_vec()))
        })
        .collect()
}

fn check_labels<T: Real>(
    params: &AttentionParams<T>,
    tables: &EmbeddingTables<T>,
    labels: &LabelSet,
) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for item in &labels.items {
        let ok = match (labels.task, item) {
            (TaskKind::NodeClass, Item::Node(i)) => *i < tables.num_nodes(),
            (TaskKind::PairClass, Item::Pair(i, j)) => {
                *i < tables.num_nodes() && *j < tables.num_nodes()
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "label item {item:?} does not match task {:?}",
                    labels.task
                )))
            }
        };
        if !ok {
            return Err(Error::Invalid(format!(
                "label item {item:?} references a node out of range"
            )));
        }
    }
    if labels.classes.iter().any(|&c| c >= params.num_classes) {
        return Err(Error::Invalid("class id exceeds head size".into()));
    }
    Ok(())
}

/// Mean cross-entropy over `labels` (all of them are treated as training
/// items) with gradients for the attention parameters and center tables.
pub fn loss_att<T: Real>(
    params: &AttentionParams<T>,
    tables: &EmbeddingTables<T>,
    labels: &LabelSet,
) -> Result<AttLossGrad<T>> {
    check_labels(params, tables, labels)?;
    let n = labels.len();
    let scale = T::one() / T::lit(n as f64);
    let mut grad = vec![T::zero(); params.data.len()];
    let mut centers = HashMap::new();
    let mut loss = 0.0;
    for (item, &class) in labels.items.iter().zip(&labels.classes) {
        loss += item_grad(params, tables, *item, class, scale, &mut grad, &mut centers);
    }
    Ok(AttLossGrad {
        loss: loss / n as f64,
        params: grad,
        centers: split_centers(centers, tables.num_views(), tables.dim()),
    })
}

#[derive(Debug, Clone)]
pub struct PlusOutput<T> {
    pub tables: EmbeddingTables<T>,
    pub params: AttentionParams<T>,
    pub trace: LossTrace,
    /// Mean supervised loss after each epoch's pass.
    pub att_trace: Vec<f64>,
}

impl<T: Real> PlusOutput<T> {
    pub fn embeddings(&self, names: &crate::graph::NodeNames) -> (Embeddings<T>, Vec<Vec<T>>) {
        attention_embeddings(&self.params, &self.tables, names)
    }
}

/// Joint training of the unsupervised losses and `gamma`-weighted
/// cross-entropy on `labels`, which must contain training items only.
///
/// Each epoch runs the unsupervised sweep and then one shuffled pass over the
/// labeled items, each step weighted by `gamma / |train|`. With `gamma = 0`
/// the supervised pass is skipped and the tables equal a plain MANE run.
pub fn train_plus<T: Real>(
    graph: &MultiViewGraph,
    corpus: &PairCorpus,
    labels: &LabelSet,
    cfg: &TrainConfig,
    gamma: f64,
) -> Result<PlusOutput<T>> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Config(
            "gamma must be a finite non-negative number".into(),
        ));
    }
    let mut trainer = Trainer::<T>::new(graph, corpus, cfg.clone())?;
    let views = graph.num_views();
    let d = trainer.tables().dim();
    let mut params =
        AttentionParams::<T>::init(views, views * d, labels.num_classes().max(2), cfg.seed);
    check_labels(&params, trainer.tables(), labels)?;

    let coefs = AdamCoefs::<T>::from(cfg.adam);
    let mut att_adam = LazyAdam::new(1, params.data.len());
    let mut rng = rng::stream(cfg.seed, Stream::Attention, &[]);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let scale = T::lit(gamma / labels.len() as f64);
    let mut att_trace = Vec::new();

    for _ in 0..cfg.epochs {
        trainer.run_epoch()?;
        let epoch = trainer.epoch();
        if gamma > 0.0 {
            order.shuffle(&mut rng);
            let mut grad = vec![T::zero(); params.data.len()];
            for (step, &k) in order.iter().enumerate() {
                grad.iter_mut().for_each(|g| *g = T::zero());
                let mut centers = HashMap::new();
                item_grad(
                    &params,
                    trainer.tables(),
                    labels.items[k],
                    labels.classes[k],
                    scale,
                    &mut grad,
                    &mut centers,
                );
                let mut ok = att_adam.step_row(&coefs, 0, &mut params.data, &grad);
                let mut store = trainer.dense_store();
                for (p, g) in split_centers(centers, views, d) {
                    ok &= store.step(p, &g);
                }
                if !ok {
                    return Err(Error::NonFinite {
                        epoch,
                        view: views,
                        step,
                    });
                }
            }
        }
        let mean = loss_att(&params, trainer.tables(), labels)?.loss;
        log::info!("epoch {epoch}: supervised loss {mean:.6}");
        att_trace.push(mean);
        if trainer.converged() {
            break;
        }
    }
    let (tables, trace) = trainer.into_parts();
    Ok(PlusOutput {
        tables,
        params,
        trace,
        att_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(views: usize, d: usize, classes: usize, seed: u64) -> AttentionParams<f64> {
        let mut p = AttentionParams::<f64>::zeros(views, views * d, classes);
        let mut rng = rng::stream(seed, Stream::Worker, &[]);
        for x in p.as_mut_slice() {
            *x = rng.gen_range(-1.0..1.0);
        }
        p
    }

    #[test]
    fn degenerate_scores() {
        let mut p = random_params(2, 3, 2, 1);
        p.z2_mut(0).iter_mut().for_each(|x| *x = 0.0);
        p.set_b2(0, 3.0);
        assert_eq!(
            attention_score(&p, &[0.3, -1.0, 2.0, 0.1, 0.0, 5.0], 0),
            3.0
        );
        let mut p = random_params(2, 3, 2, 2);
        p.set_b1(1, 0.0);
        assert_eq!(attention_score(&p, &[0.0; 6], 1), p.b2(1));
    }

    #[test]
    fn weights_singleton_equal_and_known() {
        let p = random_params(1, 4, 2, 3);
        assert_eq!(attention_weights(&p, &[0.1, 0.2, 0.3, 0.4]), vec![1.0]);

        let mut p = AttentionParams::<f64>::zeros(3, 3, 2);
        for v in 0..3 {
            p.set_b2(v, 0.7);
        }
        let w = attention_weights(&p, &[1.0, 2.0, 3.0]);
        assert!(w.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));

        let mut p = AttentionParams::<f64>::zeros(2, 2, 2);
        p.set_b2(0, 2f64.ln());
        let w = attention_weights(&p, &[0.5, 0.5]);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12 && (w[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_blocks_and_range() {
        let p = random_params(2, 3, 2, 4);
        let zeros = EmbeddingTables::<f64>::zeros(2, 2, 3);
        assert!(attention_aggregate(&p, &zeros, 1).iter().all(|&x| x == 0.0));

        let mut t = EmbeddingTables::<f64>::zeros(2, 1, 3);
        t.row_mut(Param::center(0, 0))
            .copy_from_slice(&[3.0, -2.0, 1.0]);
        t.row_mut(Param::center(1, 0))
            .copy_from_slice(&[0.5, 9.0, -4.0]);
        let fa = attention_aggregate(&p, &t, 0);
        let a = attention_weights(&p, &concat_centers(&t, 0));
        for k in 0..6 {
            let expect = (a[k / 3] * concat_centers(&t, 0)[k]).tanh();
            assert_eq!(fa[k], expect);
            assert!(fa[k] > -1.0 && fa[k] < 1.0);
        }

        let p1 = random_params(1, 3, 2, 5);
        let mut t1 = EmbeddingTables::<f64>::zeros(1, 1, 3);
        t1.row_mut(Param::center(0, 0))
            .copy_from_slice(&[0.2, -0.4, 1.5]);
        let fa = attention_aggregate(&p1, &t1, 0);
        for (x, y) in fa.iter().zip([0.2f64, -0.4, 1.5]) {
            assert_eq!(*x, y.tanh());
        }
    }

    fn node_labels(items: Vec<usize>, classes: Vec<usize>, num_classes: usize) -> LabelSet {
        LabelSet {
            task: TaskKind::NodeClass,
            folds: vec![0; items.len()],
            items: items.into_iter().map(Item::Node).collect(),
            classes,
            class_names: (0..num_classes).map(|c| c.to_string()).collect(),
            num_folds: 2,
        }
    }

    #[test]
    fn saturated_and_uniform_heads() {
        let t = EmbeddingTables::<f64>::zeros(2, 2, 2);
        let mut p = AttentionParams::<f64>::zeros(2, 4, 2);
        p.set_head_bias(0, 20.0);
        p.set_head_bias(1, -20.0);
        let l = loss_att(&p, &t, &node_labels(vec![0, 1], vec![0, 0], 2)).unwrap();
        assert!(l.loss < 1e-8, "{}", l.loss);

        let p = AttentionParams::<f64>::zeros(2, 4, 5);
        let l = loss_att(&p, &t, &node_labels(vec![0, 1], vec![3, 1], 5)).unwrap();
        assert!((l.loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatched_labels_fail() {
        let t = EmbeddingTables::<f64>::zeros(2, 2, 2);
        let p = AttentionParams::<f64>::zeros(2, 4, 2);
        assert!(matches!(
            loss_att(&p, &t, &node_labels(vec![], vec![], 2)),
            Err(Error::EmptyTrainingSet)
        ));
        let mut bad = node_labels(vec![0], vec![0], 2);
        bad.task = TaskKind::PairClass;
        assert!(loss_att(&p, &t, &bad).is_err());
    }
}
