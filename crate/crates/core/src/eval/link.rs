//! Link-prediction instances: positive pairs plus uniformly sampled negatives.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embed::Embeddings;
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    Concat,
    #[default]
    Hadamard,
}

impl Combiner {
    pub fn output_dim(&self, dim: usize) -> usize {
        match self {
            Combiner::Concat => 2 * dim,
            Combiner::Hadamard => dim,
        }
    }

    pub fn combine(&self, a: &[f64], b: &[f64], out: &mut Vec<f64>) {
        match self {
            Combiner::Concat => {
                out.extend_from_slice(a);
                out.extend_from_slice(b);
            }
            Combiner::Hadamard => out.extend(a.iter().zip(b).map(|(x, y)| x * y)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkInstances {
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<bool>,
    pub dim: usize,
    /// Row-major, one row per pair.
    pub features: Vec<f64>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// `neg_ratio` negatives per positive, drawn uniformly from unordered node
/// pairs that are neither self-pairs nor positives.
pub fn sample_negatives(
    num_nodes: usize,
    positives: &[(usize, usize)],
    neg_ratio: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let taken: HashSet<(usize, usize)> = positives.iter().map(|&(a, b)| key(a, b)).collect();
    let all = num_nodes * num_nodes.saturating_sub(1) / 2;
    let available = all - taken.iter().filter(|(a, b)| a != b).count();
    let needed = positives.len() * neg_ratio;
    if needed > available {
        return Err(Error::NotEnoughNegatives { needed, available });
    }
    let mut rng = rng::stream(seed, Stream::LinkNegatives, &[]);
    if 2 * needed > available {
        // Dense regime: enumerate the candidates.
        let mut cands: Vec<(usize, usize)> = (0..num_nodes)
            .flat_map(|a| (a + 1..num_nodes).map(move |b| (a, b)))
            .filter(|p| !taken.contains(p))
            .collect();
        cands.shuffle(&mut rng);
        cands.truncate(needed);
        return Ok(cands);
    }
    let mut chosen = HashSet::with_capacity(needed);
    let mut out = Vec::with_capacity(needed);
    while out.len() < needed {
        let a = rng.gen_range(0..num_nodes);
        let b = rng.gen_range(0..num_nodes);
        let p = key(a, b);
        if a == b || taken.contains(&p) || !chosen.insert(p) {
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

pub fn build_link_instances(
    emb: &Embeddings<f64>,
    positives: &[(usize, usize)],
    neg_ratio: usize,
    combiner: Combiner,
    seed: u64,
) -> Result<LinkInstances> {
    if neg_ratio < 1 {
        return Err(Error::Config("neg_ratio must be >= 1".into()));
    }
    if let Some(&(a, b)) = positives
        .iter()
        .find(|&&(a, b)| a >= emb.len() || b >= emb.len())
    {
        return Err(Error::Invalid(format!("pair ({a}, {b}) has no embedding")));
    }
    let negatives = sample_negatives(emb.len(), positives, neg_ratio, seed)?;
    let pairs: Vec<(usize, usize)> = positives.iter().copied().chain(negatives).collect();
    let labels = (0..pairs.len()).map(|k| k < positives.len()).collect();
    let dim = combiner.output_dim(emb.dim);
    let mut features = Vec::with_capacity(pairs.len() * dim);
    for &(a, b) in &pairs {
        combiner.combine(emb.row(a), emb.row(b), &mut features);
    }
    Ok(LinkInstances {
        pairs,
        labels,
        dim,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeNames;

    fn emb(n: usize, d: usize) -> Embeddings<f64> {
        Embeddings {
            names: NodeNames::numbered(n),
            dim: d,
            values: (0..n * d).map(|k| k as f64).collect(),
        }
    }

    #[test]
    fn counts_and_shapes() {
        let pos: Vec<(usize, usize)> = (0..10).map(|k| (k, k + 1)).collect();
        let e = emb(30, 4);
        let h = build_link_instances(&e, &pos, 5, Combiner::Hadamard, 1).unwrap();
        assert_eq!(h.pairs.len(), 60);
        assert_eq!(h.labels.iter().filter(|&&l| l).count(), 10);
        assert_eq!(h.dim, 4);
        assert_eq!(h.features.len(), 60 * 4);
        let c = build_link_instances(&e, &pos, 5, Combiner::Concat, 1).unwrap();
        assert_eq!(c.dim, 8);
    }

    #[test]
    fn negatives_avoid_positives() {
        let pos: Vec<(usize, usize)> = (0..8)
            .flat_map(|a| (a + 1..8).map(move |b| (b, a)))
            .take(20)
            .collect();
        let neg = sample_negatives(8, &pos, 0, 3).unwrap();
        assert!(neg.is_empty());
        let few: Vec<(usize, usize)> = pos[..4].to_vec();
        let neg = sample_negatives(8, &few, 6, 3).unwrap();
        assert_eq!(neg.len(), 24);
        let set: HashSet<_> = few.iter().map(|&(a, b)| key(a, b)).collect();
        assert!(neg.iter().all(|p| !set.contains(p) && p.0 != p.1));
        assert_eq!(neg.iter().collect::<HashSet<_>>().len(), 24);
    }

    #[test]
    fn too_many_negatives() {
        let err = sample_negatives(4, &[(0, 1)], 6, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::NotEnoughNegatives {
                needed: 6,
                available: 5
            }
        ));
    }
}
