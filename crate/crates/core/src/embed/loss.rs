//! The three pair losses and their gradients.
//!
//! Every loss term has the same shape: an input vector `x` scored against a
//! positive output vector and either sampled negatives (logistic surrogate)
//! or every row of the output table (exact softmax). The terms differ only in
//! which table rows play those roles:
//!
//! | term         | input         | positive        | outputs          |
//! |--------------|---------------|-----------------|------------------|
//! | diversity    | center(v, i)  | context(v, j)   | context rows, v  |
//! | first-order  | center(v, i)  | center(v', i)   | center rows, v'  |
//! | second-order | center(v', i) | context(v, j)   | context rows, v  |

use crate::real::{dot, neg_log_sigmoid, sigmoid, Real};

use super::adam::ParamStore;
use super::tables::{EmbeddingTables, Param, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// Intra-view pair (i, j) in `view`.
    Diversity {
        view: usize,
        center: usize,
        context: usize,
    },
    /// Cross-view, intra-node pair (i in `view`, i in `other`).
    FirstOrder {
        view: usize,
        other: usize,
        node: usize,
    },
    /// Cross-view, cross-node pair (i in `other`, j in `view`) formed from the
    /// intra-view pair (i, j) of `view`.
    SecondOrder {
        view: usize,
        other: usize,
        center: usize,
        context: usize,
    },
}

impl Term {
    pub fn input(&self) -> Param {
        match *self {
            Term::Diversity { view, center, .. } => Param::center(view, center),
            Term::FirstOrder { view, node, .. } => Param::center(view, node),
            Term::SecondOrder { other, center, .. } => Param::center(other, center),
        }
    }

    pub fn output(&self, node: usize) -> Param {
        match *self {
            Term::Diversity { view, .. } | Term::SecondOrder { view, .. } => {
                Param::context(view, node)
            }
            Term::FirstOrder { other, .. } => Param::center(other, node),
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Term::Diversity { context, .. } | Term::SecondOrder { context, .. } => context,
            Term::FirstOrder { node, .. } => node,
        }
    }

    pub fn positive(&self) -> Param {
        self.output(self.target())
    }
}

/// Loss value and the gradient of every touched row (rows are distinct).
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad<T> {
    pub loss: f64,
    pub grads: Vec<(Param, Vec<T>)>,
}

impl<T: Real> LossGrad<T> {
    pub fn grad(&self, p: Param) -> Option<&[T]> {
        self.grads
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, g)| g.as_slice())
    }
}

#[derive(Debug, Default)]
pub(crate) struct Scratch<T> {
    x: Vec<T>,
    row: Vec<T>,
    grad_in: Vec<T>,
    tmp: Vec<T>,
    coefs: Vec<(Param, T)>,
    outputs: Vec<T>,
    logits: Vec<f64>,
}

impl<T: Real> Scratch<T> {
    pub(crate) fn new(dim: usize) -> Self {
        Scratch {
            x: vec![T::zero(); dim],
            row: vec![T::zero(); dim],
            grad_in: vec![T::zero(); dim],
            tmp: vec![T::zero(); dim],
            coefs: Vec::new(),
            outputs: Vec::new(),
            logits: Vec::new(),
        }
    }
}

/// Negative-sampling step:
/// `-log σ(x·p) - Σ_k log σ(-x·n_k)`, gradients scaled by `weight`.
///
/// All gradients are taken at the pre-update values; rows are then updated
/// in the order input, positive, distinct negatives. Returns the unweighted
/// loss, or `None` if an update produced a non-finite value.
pub(crate) fn sampled_step<T: Real, S: ParamStore<T>>(
    store: &mut S,
    term: Term,
    negatives: &[usize],
    weight: T,
    s: &mut Scratch<T>,
) -> Option<f64> {
    let input = term.input();
    let positive = term.positive();
    store.read(input, &mut s.x);
    store.read(positive, &mut s.row);

    let score = dot(&s.x, &s.row);
    let mut loss = neg_log_sigmoid(score.as_f64());
    let g_pos = (sigmoid(score) - T::one()) * weight;
    for (g, &p) in s.grad_in.iter_mut().zip(&s.row) {
        *g = g_pos * p;
    }

    s.coefs.clear();
    for &u in negatives {
        let out = term.output(u);
        store.read(out, &mut s.row);
        let score = dot(&s.x, &s.row);
        loss += neg_log_sigmoid(-score.as_f64());
        let g_neg = sigmoid(score) * weight;
        for (g, &n) in s.grad_in.iter_mut().zip(&s.row) {
            *g = *g + g_neg * n;
        }
        match s.coefs.iter_mut().find(|(q, _)| *q == out) {
            Some((_, c)) => *c = *c + g_neg,
            None => s.coefs.push((out, g_neg)),
        }
    }

    let mut finite = store.step(input, &s.grad_in);
    for (t, &x) in s.tmp.iter_mut().zip(&s.x) {
        *t = g_pos * x;
    }
    finite &= store.step(positive, &s.tmp);
    for k in 0..s.coefs.len() {
        let (out, c) = s.coefs[k];
        for (t, &x) in s.tmp.iter_mut().zip(&s.x) {
            *t = c * x;
        }
        finite &= store.step(out, &s.tmp);
    }
    finite.then_some(loss)
}

/// Full-softmax step: `-log softmax_j(x · out_u)` over every node `u`.
pub(crate) fn exact_step<T: Real, S: ParamStore<T>>(
    store: &mut S,
    term: Term,
    num_nodes: usize,
    weight: T,
    s: &mut Scratch<T>,
) -> Option<f64> {
    let dim = s.x.len();
    let input = term.input();
    store.read(input, &mut s.x);
    s.outputs.resize(num_nodes * dim, T::zero());
    s.logits.clear();
    for u in 0..num_nodes {
        let row = &mut s.outputs[u * dim..(u + 1) * dim];
        store.read(term.output(u), row);
        s.logits.push(dot(&s.x, row).as_f64());
    }
    let lse = crate::real::log_sum_exp(s.logits.iter().copied());
    let target = term.target();
    let loss = lse - s.logits[target];

    for g in s.grad_in.iter_mut() {
        *g = T::zero();
    }
    s.coefs.clear();
    for u in 0..num_nodes {
        let p = (s.logits[u] - lse).exp() - if u == target { 1.0 } else { 0.0 };
        let c = T::lit(p) * weight;
        let row = &s.outputs[u * dim..(u + 1) * dim];
        for (g, &o) in s.grad_in.iter_mut().zip(row) {
            *g = *g + c * o;
        }
        s.coefs.push((term.output(u), c));
    }

    let mut finite = store.step(input, &s.grad_in);
    for k in 0..s.coefs.len() {
        let (out, c) = s.coefs[k];
        for (t, &x) in s.tmp.iter_mut().zip(&s.x) {
            *t = c * x;
        }
        finite &= store.step(out, &s.tmp);
    }
    finite.then_some(loss)
}

/// A store that records gradients instead of applying them, so the public
/// loss functions share the training kernels' arithmetic.
struct Recorder<'a, T> {
    tables: &'a EmbeddingTables<T>,
    grads: Vec<(Param, Vec<T>)>,
}

impl<T: Real> ParamStore<T> for Recorder<'_, T> {
    fn read(&self, p: Param, out: &mut [T]) {
        out.copy_from_slice(self.tables.row(p));
    }

    fn step(&mut self, p: Param, grad: &[T]) -> bool {
        self.grads.push((p, grad.to_vec()));
        true
    }
}

/// Sampled loss of one term and its gradients.
pub fn sampled_loss<T: Real>(
    tables: &EmbeddingTables<T>,
    term: Term,
    negatives: &[usize],
) -> LossGrad<T> {
    let mut rec = Recorder {
        tables,
        grads: Vec::new(),
    };
    let mut s = Scratch::new(tables.dim());
    let loss =
        sampled_step(&mut rec, term, negatives, T::one(), &mut s).expect("recorder is finite");
    LossGrad {
        loss,
        grads: rec.grads,
    }
}

/// Exact (full softmax) loss of one term and its gradients.
pub fn exact_loss<T: Real>(tables: &EmbeddingTables<T>, term: Term) -> LossGrad<T> {
    let mut rec = Recorder {
        tables,
        grads: Vec::new(),
    };
    let mut s = Scratch::new(tables.dim());
    let loss = exact_step(&mut rec, term, tables.num_nodes(), T::one(), &mut s)
        .expect("recorder is finite");
    LossGrad {
        loss,
        grads: rec.grads,
    }
}

/// Diversity loss of the intra-view pair (i, j) in view `v`.
pub fn loss_div<T: Real>(
    tables: &EmbeddingTables<T>,
    v: usize,
    i: usize,
    j: usize,
    negatives: &[usize],
) -> LossGrad<T> {
    sampled_loss(
        tables,
        Term::Diversity {
            view: v,
            center: i,
            context: j,
        },
        negatives,
    )
}

/// First-order collaboration loss aligning node `i` in `v` with itself in `other`.
pub fn loss_c1<T: Real>(
    tables: &EmbeddingTables<T>,
    v: usize,
    other: usize,
    i: usize,
    negatives: &[usize],
) -> LossGrad<T> {
    assert_ne!(v, other);
    sampled_loss(
        tables,
        Term::FirstOrder {
            view: v,
            other,
            node: i,
        },
        negatives,
    )
}

/// Second-order collaboration loss pulling `i` in `other` toward context `j` of `v`.
pub fn loss_c2<T: Real>(
    tables: &EmbeddingTables<T>,
    v: usize,
    other: usize,
    i: usize,
    j: usize,
    negatives: &[usize],
) -> LossGrad<T> {
    assert_ne!(v, other);
    sampled_loss(
        tables,
        Term::SecondOrder {
            view: v,
            other,
            center: i,
            context: j,
        },
        negatives,
    )
}

/// Which probability table a softmax is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftmaxSide {
    /// `P(j | i)` over context vectors of the same view.
    Context,
    /// `P(j in other | i in v)` over center vectors of `other`.
    Center(usize),
}

/// Exact conditional distribution over all nodes for center `i` in view `v`.
pub fn softmax_distribution<T: Real>(
    tables: &EmbeddingTables<T>,
    v: usize,
    i: usize,
    side: SoftmaxSide,
) -> Vec<f64> {
    let x = tables.center(v, i);
    let (out_side, out_view) = match side {
        SoftmaxSide::Context => (Side::Context, v),
        SoftmaxSide::Center(other) => (Side::Center, other),
    };
    let logits: Vec<f64> = (0..tables.num_nodes())
        .map(|u| {
            dot(
                x,
                tables.row(Param {
                    side: out_side,
                    view: out_view,
                    node: u,
                }),
            )
            .as_f64()
        })
        .collect();
    let lse = crate::real::log_sum_exp(logits.iter().copied());
    logits.iter().map(|l| (l - lse).exp()).collect()
}

pub fn softmax_prob<T: Real>(
    tables: &EmbeddingTables<T>,
    v: usize,
    i: usize,
    j: usize,
    side: SoftmaxSide,
) -> f64 {
    softmax_distribution(tables, v, i, side)[j]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables_with(v: usize, n: usize, d: usize, f: impl Fn(usize) -> f64) -> EmbeddingTables<f64> {
        let mut t = EmbeddingTables::<f64>::zeros(v, n, d);
        for (k, x) in t.as_mut_slice().iter_mut().enumerate() {
            *x = f(k);
        }
        t
    }

    #[test]
    fn zero_vectors_give_log2_per_term() {
        let t = EmbeddingTables::<f64>::zeros(2, 5, 4);
        let k = 3;
        let negs = [1, 2, 4];
        let expect = (1 + k) as f64 * 2f64.ln();
        assert!((loss_div(&t, 0, 0, 3, &negs).loss - expect).abs() < 1e-12);
        assert!((loss_c1(&t, 0, 1, 0, &negs).loss - expect).abs() < 1e-12);
        assert!((loss_c2(&t, 0, 1, 0, 3, &negs).loss - expect).abs() < 1e-12);
    }

    #[test]
    fn saturated_scores_closed_form() {
        // x = e0, positive context = 10 e0, negative contexts = -10 e0.
        let mut t = EmbeddingTables::<f64>::zeros(1, 4, 2);
        t.row_mut(Param::center(0, 0))[0] = 1.0;
        t.row_mut(Param::context(0, 1))[0] = 10.0;
        t.row_mut(Param::context(0, 2))[0] = -10.0;
        t.row_mut(Param::context(0, 3))[0] = -10.0;
        let lg = loss_div(&t, 0, 0, 1, &[2, 3]);
        let expect = 3.0 * (1.0 + (-10f64).exp()).ln();
        assert!((lg.loss - expect).abs() < 1e-15);
    }

    #[test]
    fn duplicate_negatives_merge_into_one_row() {
        let t = tables_with(1, 4, 3, |k| (k as f64 * 0.37).sin());
        let lg = loss_div(&t, 0, 0, 1, &[2, 2, 3]);
        assert_eq!(lg.grads.len(), 4);
        let single = loss_div(&t, 0, 0, 1, &[2]);
        let g2 = lg.grad(Param::context(0, 2)).unwrap();
        let g1 = single.grad(Param::context(0, 2)).unwrap();
        for (a, b) in g2.iter().zip(g1) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn first_order_positive_term_decreases_with_norm() {
        // identical vectors in both views: -log σ(|f|^2) shrinks as |f| grows
        let mut prev = f64::INFINITY;
        for scale in [0.1, 0.5, 1.0, 2.0] {
            let mut t = EmbeddingTables::<f64>::zeros(2, 3, 2);
            for v in 0..2 {
                t.row_mut(Param::center(v, 0))
                    .copy_from_slice(&[scale, scale]);
            }
            let loss = loss_c1(&t, 0, 1, 0, &[]).loss;
            assert!(loss < prev);
            prev = loss;
        }
    }

    #[test]
    fn softmax_uniform_for_zero_tables() {
        let t = EmbeddingTables::<f64>::zeros(2, 7, 3);
        for side in [SoftmaxSide::Context, SoftmaxSide::Center(1)] {
            let p = softmax_distribution(&t, 0, 2, side);
            assert!(p.iter().all(|&x| (x - 1.0 / 7.0).abs() < 1e-15));
        }
    }

    #[test]
    fn softmax_single_hot_logit() {
        // logits (1, 0, 0)
        let mut t = EmbeddingTables::<f64>::zeros(1, 3, 1);
        t.row_mut(Param::center(0, 0))[0] = 1.0;
        t.row_mut(Param::context(0, 0))[0] = 1.0;
        let e = std::f64::consts::E;
        let p = softmax_prob(&t, 0, 0, 0, SoftmaxSide::Context);
        assert!((p - e / (e + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_loss_matches_distribution() {
        let t = tables_with(2, 6, 3, |k| ((k * 7 % 11) as f64 - 5.0) * 0.1);
        let lg = exact_loss(
            &t,
            Term::Diversity {
                view: 1,
                center: 2,
                context: 4,
            },
        );
        let p = softmax_prob(&t, 1, 2, 4, SoftmaxSide::Context);
        assert!((lg.loss + p.ln()).abs() < 1e-12);
        let lg = exact_loss(
            &t,
            Term::FirstOrder {
                view: 0,
                other: 1,
                node: 3,
            },
        );
        let p = softmax_prob(&t, 0, 3, 3, SoftmaxSide::Center(1));
        assert!((lg.loss + p.ln()).abs() < 1e-12);
    }
}
