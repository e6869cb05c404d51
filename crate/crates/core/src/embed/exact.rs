//! Exact (full-softmax) objective over a whole corpus.

use serde::{Deserialize, Serialize};

use crate::real::{log_sum_exp, Real};
use crate::walk::PairCorpus;

use super::tables::{EmbeddingTables, Param};

/// Unweighted loss components; `total` applies the collaboration weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub div: f64,
    pub c1: f64,
    pub c2: f64,
}

impl LossBreakdown {
    pub fn total(&self, alpha: f64, beta: f64) -> f64 {
        self.div + alpha * self.c1 + beta * self.c2
    }
}

fn dot64<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.as_f64() * y.as_f64()).sum()
}

/// Log partition `log Σ_u exp(out(u) · x)` for every node's input vector.
fn log_partitions<T: Real>(
    tables: &EmbeddingTables<T>,
    input: impl Fn(usize) -> Param,
    output: impl Fn(usize) -> Param,
) -> Vec<f64> {
    let n = tables.num_nodes();
    (0..n)
        .map(|i| {
            let x = tables.row(input(i));
            log_sum_exp((0..n).map(|u| dot64(x, tables.row(output(u)))))
        })
        .collect()
}

/// Sums of negative log-likelihoods of every intra-view, cross-view
/// intra-node and cross-view cross-node pair under the exact softmax.
pub fn exact_objective<T: Real>(tables: &EmbeddingTables<T>, corpus: &PairCorpus) -> LossBreakdown {
    let n = tables.num_nodes();
    let views = tables.num_views();
    let mut out = LossBreakdown::default();
    for v in 0..views {
        let pairs = &corpus.pairs[v];
        if pairs.is_empty() {
            continue;
        }
        let lse = log_partitions(tables, |i| Param::center(v, i), |u| Param::context(v, u));
        for &(i, j) in pairs {
            let (i, j) = (i as usize, j as usize);
            out.div += lse[i] - dot64(tables.center(v, i), tables.context(v, j));
        }

        let mut centers = vec![0usize; n];
        for &(i, _) in pairs {
            centers[i as usize] += 1;
        }
        for other in (0..views).filter(|&o| o != v) {
            let lse1 = log_partitions(tables, |i| Param::center(v, i), |u| Param::center(other, u));
            for (i, &count) in centers.iter().enumerate().filter(|(_, &c)| c > 0) {
                let pos = dot64(tables.center(v, i), tables.center(other, i));
                out.c1 += count as f64 * (lse1[i] - pos);
            }
            let lse2 = log_partitions(
                tables,
                |i| Param::center(other, i),
                |u| Param::context(v, u),
            );
            for &(i, j) in pairs {
                let (i, j) = (i as usize, j as usize);
                out.c2 += lse2[i] - dot64(tables.center(other, i), tables.context(v, j));
            }
        }
    }
    out
}
