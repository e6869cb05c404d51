//! Reference implementations used as test oracles. They share nothing with
//! the library beyond its public RNG streams and data types.

#![allow(dead_code)]

use mvembed::embed::{EmbeddingTables, Param, Side};
use mvembed::rng::{self, Stream, StreamRng};
use mvembed::MultiViewGraph;
use rand::seq::SliceRandom;
use rand::Rng;

/// `|a - n|_inf / max(|a|_inf, |n|_inf)`; zero when both vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max);
    let scale = analytic
        .iter()
        .chain(numeric)
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central differences of `f` with respect to every coordinate of `x`.
pub fn central_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..x.len())
        .map(|k| {
            buf[k] = x[k] + h;
            let up = f(&buf);
            buf[k] = x[k] - h;
            let down = f(&buf);
            buf[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Every (side, view, node) row in table order.
pub fn all_params(views: usize, nodes: usize) -> Vec<Param> {
    [Side::Center, Side::Context]
        .into_iter()
        .flat_map(|side| {
            (0..views).flat_map(move |view| (0..nodes).map(move |node| Param { side, view, node }))
        })
        .collect()
}

/// Table values with every entry replaced by `values` (table order).
pub fn tables_from<T: mvembed::Real>(
    shape: &EmbeddingTables<T>,
    values: &[f64],
) -> EmbeddingTables<f64> {
    let mut t = EmbeddingTables::<f64>::zeros(shape.num_views(), shape.num_nodes(), shape.dim());
    let d = shape.dim();
    for (r, p) in all_params(shape.num_views(), shape.num_nodes())
        .into_iter()
        .enumerate()
    {
        t.row_mut(p).copy_from_slice(&values[r * d..(r + 1) * d]);
    }
    t
}

pub fn flatten<T: mvembed::Real>(t: &EmbeddingTables<T>) -> Vec<f64> {
    all_params(t.num_views(), t.num_nodes())
        .into_iter()
        .flat_map(|p| t.row(p).iter().map(|x| x.as_f64()).collect::<Vec<_>>())
        .collect()
}

pub fn random_tables(
    views: usize,
    nodes: usize,
    dim: usize,
    rng: &mut StreamRng,
) -> EmbeddingTables<f64> {
    let mut t = EmbeddingTables::<f64>::zeros(views, nodes, dim);
    for p in all_params(views, nodes) {
        for x in t.row_mut(p) {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    t
}

/// Exact softmax probabilities, computed naively with a max shift.
pub fn naive_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

/// `P(linked in w | linked in v) / P(linked in w | not linked in v)` by
/// enumerating every unordered node pair.
pub fn ratio_by_enumeration(g: &MultiViewGraph, v: usize, w: usize) -> Option<f64> {
    let n = g.num_nodes();
    let (mut in_v, mut in_both, mut out_v, mut out_v_in_w) = (0u64, 0u64, 0u64, 0u64);
    for a in 0..n {
        for b in a + 1..n {
            let lw = g.has_edge(w, a, b);
            if g.has_edge(v, a, b) {
                in_v += 1;
                in_both += lw as u64;
            } else {
                out_v += 1;
                out_v_in_w += lw as u64;
            }
        }
    }
    (in_v > 0 && out_v_in_w > 0)
        .then(|| (in_both as f64 / in_v as f64) / (out_v_in_w as f64 / out_v as f64))
}

/// Plain single-view skip-gram with negative sampling and per-row Adam,
/// written out longhand.
pub struct ReferenceSgns {
    pub n: usize,
    pub d: usize,
    pub center: Vec<Vec<f64>>,
    pub context: Vec<Vec<f64>>,
    center_state: Vec<RowAdam>,
    context_state: Vec<RowAdam>,
    pairs: Vec<(u32, u32)>,
    cumulative: Vec<f64>,
    rng: StreamRng,
    negatives: usize,
    lr: f64,
}

#[derive(Clone)]
struct RowAdam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl RowAdam {
    fn new(d: usize) -> Self {
        RowAdam {
            m: vec![0.0; d],
            v: vec![0.0; d],
            t: 0,
        }
    }

    fn apply(&mut self, row: &mut [f64], g: &[f64], lr: f64) {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
        self.t += 1;
        for k in 0..row.len() {
            self.m[k] = b1 * self.m[k] + (1.0 - b1) * g[k];
            self.v[k] = b2 * self.v[k] + (1.0 - b2) * g[k] * g[k];
            let mh = self.m[k] / (1.0 - b1.powi(self.t));
            let vh = self.v[k] / (1.0 - b2.powi(self.t));
            row[k] = row[k] - lr * mh / (vh.sqrt() + eps);
        }
    }
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s = s + a[k] * b[k];
    }
    s
}

impl ReferenceSgns {
    /// `stream_coord` selects the per-view init and sampling streams.
    pub fn new(
        n: usize,
        d: usize,
        pairs: Vec<(u32, u32)>,
        seed: u64,
        stream_coord: u64,
        negatives: usize,
        lr: f64,
    ) -> Self {
        let mut init = rng::stream(seed, Stream::Init, &[stream_coord]);
        let center = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| (init.gen::<f64>() - 0.5) / d as f64)
                    .collect()
            })
            .collect();
        let mut counts = vec![0u64; n];
        for &(i, _) in &pairs {
            counts[i as usize] += 1;
        }
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        ReferenceSgns {
            n,
            d,
            center,
            context: vec![vec![0.0; d]; n],
            center_state: vec![RowAdam::new(d); n],
            context_state: vec![RowAdam::new(d); n],
            pairs,
            cumulative,
            rng: rng::stream(seed, Stream::Diversity, &[stream_coord]),
            negatives,
            lr,
        }
    }

    fn draw(&mut self) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = self.rng.gen::<f64>() * total;
        let mut idx = self.cumulative.len() - 1;
        for (k, &c) in self.cumulative.iter().enumerate() {
            if c > u {
                idx = k;
                break;
            }
        }
        idx
    }

    pub fn epoch(&mut self) {
        let mut pairs = std::mem::take(&mut self.pairs);
        pairs.shuffle(&mut self.rng);
        for &(i, j) in &pairs {
            let (i, j) = (i as usize, j as usize);
            let mut negs = Vec::new();
            for _ in 0..self.negatives {
                for _ in 0..100 {
                    let u = self.draw();
                    if u != j {
                        negs.push(u);
                        break;
                    }
                }
            }
            let x = self.center[i].clone();
            let score = dotp(&x, &self.context[j]);
            let gp = (sig(score) - 1.0) * 1.0;
            let mut gin: Vec<f64> = self.context[j].iter().map(|p| gp * p).collect();
            let mut merged: Vec<(usize, f64)> = Vec::new();
            for &u in &negs {
                let s = dotp(&x, &self.context[u]);
                let gn = sig(s) * 1.0;
                for k in 0..self.d {
                    gin[k] = gin[k] + gn * self.context[u][k];
                }
                match merged.iter_mut().find(|(q, _)| *q == u) {
                    Some((_, c)) => *c = *c + gn,
                    None => merged.push((u, gn)),
                }
            }
            self.center_state[i].apply(&mut self.center[i], &gin, self.lr);
            let g: Vec<f64> = x.iter().map(|v| gp * v).collect();
            self.context_state[j].apply(&mut self.context[j], &g, self.lr);
            for (u, c) in merged {
                let g: Vec<f64> = x.iter().map(|v| c * v).collect();
                self.context_state[u].apply(&mut self.context[u], &g, self.lr);
            }
        }
        self.pairs = pairs;
    }
}
