//! Synthetic multi-view graphs with planted communities and cross-view
//! edge correlation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MultiViewGraph, NodeNames, Warning};
use crate::labels::{Item, LabelSet, TaskKind};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_nodes: usize,
    pub num_views: usize,
    pub num_communities: usize,
    /// Community membership probabilities; uniform when empty.
    #[serde(default)]
    pub membership: Vec<f64>,
    /// Per-view within-community edge probability.
    pub p_intra: Vec<f64>,
    /// Per-view between-community edge probability.
    pub p_inter: Vec<f64>,
    /// Probability that a base-view edge is copied into each other view.
    pub cross_copy: f64,
    /// Probability of an extra uniformly random edge per node pair in each
    /// non-base view.
    pub p_noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Two-community spec where view 0 is a planted partition and the other
    /// views copy its edges with probability `q` plus uniform noise.
    pub fn copy_model(
        num_nodes: usize,
        num_views: usize,
        p_intra: f64,
        p_inter: f64,
        q: f64,
        p_noise: f64,
        seed: u64,
    ) -> Self {
        let mut intra = vec![0.0; num_views];
        let mut inter = vec![0.0; num_views];
        intra[0] = p_intra;
        inter[0] = p_inter;
        SynthSpec {
            num_nodes,
            num_views,
            num_communities: 2,
            membership: Vec::new(),
            p_intra: intra,
            p_inter: inter,
            cross_copy: q,
            p_noise,
            seed,
        }
    }

    fn membership(&self) -> Vec<f64> {
        if self.membership.is_empty() {
            vec![1.0 / self.num_communities as f64; self.num_communities]
        } else {
            self.membership.clone()
        }
    }

    pub fn validate(&self) -> Result<Vec<Warning>> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_nodes < 4 {
            return bad("num_nodes must be >= 4".into());
        }
        if self.num_views < 1 || self.num_communities < 1 {
            return bad("need at least one view and one community".into());
        }
        if self.p_intra.len() != self.num_views || self.p_inter.len() != self.num_views {
            return bad("p_intra and p_inter need one entry per view".into());
        }
        if !self.membership.is_empty() {
            if self.membership.len() != self.num_communities {
                return bad("membership needs one probability per community".into());
            }
            if (self.membership.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("membership probabilities must sum to 1".into());
            }
        }
        let probs = self
            .p_intra
            .iter()
            .chain(&self.p_inter)
            .chain(&self.membership)
            .chain([&self.cross_copy, &self.p_noise]);
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("probability {p} outside [0, 1]"));
            }
        }
        let mut warnings = Vec::new();
        for v in 0..self.num_views {
            let deg = self.expected_degree(v);
            if deg < 1.0 {
                let w = Warning::LowDegree {
                    expected: format!("{deg:.3} in view {v}"),
                };
                log::warn!("{w}");
                warnings.push(w);
            }
        }
        Ok(warnings)
    }

    /// Probability that a random node pair shares a community.
    fn same_community_fraction(&self) -> f64 {
        self.membership().iter().map(|p| p * p).sum()
    }

    fn planted(&self, v: usize, same: bool) -> f64 {
        if same {
            self.p_intra[v]
        } else {
            self.p_inter[v]
        }
    }

    /// Probability that a pair is linked in view `w` given whether it is in
    /// the base view and whether its endpoints share a community.
    fn link_prob(&self, w: usize, in_base: bool, same: bool) -> f64 {
        if w == 0 {
            return if in_base { 1.0 } else { 0.0 };
        }
        let copy = if in_base { self.cross_copy } else { 0.0 };
        1.0 - (1.0 - copy) * (1.0 - self.planted(w, same)) * (1.0 - self.p_noise)
    }

    pub fn expected_degree(&self, v: usize) -> f64 {
        let s = self.same_community_fraction();
        let p: f64 = [(s, true), (1.0 - s, false)]
            .iter()
            .map(|&(frac, same)| {
                let pb = self.planted(0, same);
                frac * (pb * self.link_prob(v, true, same)
                    + (1.0 - pb) * self.link_prob(v, false, same))
            })
            .sum();
        p * (self.num_nodes - 1) as f64
    }

    /// Expected co-occurrence ratio between the base view and view `w`,
    /// averaging over community membership.
    pub fn expected_ratio(&self, w: usize) -> f64 {
        assert!(w > 0 && w < self.num_views);
        let s = self.same_community_fraction();
        let (mut in_base, mut in_both, mut out_base, mut out_in_w) = (0.0, 0.0, 0.0, 0.0);
        for (frac, same) in [(s, true), (1.0 - s, false)] {
            let pb = self.planted(0, same);
            in_base += frac * pb;
            in_both += frac * pb * self.link_prob(w, true, same);
            out_base += frac * (1.0 - pb);
            out_in_w += frac * (1.0 - pb) * self.link_prob(w, false, same);
        }
        (in_both / in_base) / (out_in_w / out_base)
    }
}

/// Calls `f(i, j)` for each pair `i < j` kept independently with probability
/// `p`, skipping ahead geometrically between kept pairs.
fn bernoulli_pairs<R: Rng>(n: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize, usize)) {
    if p <= 0.0 || n < 2 {
        return;
    }
    if p >= 1.0 {
        for i in 0..n {
            for j in i + 1..n {
                f(i, j);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    // (i, j) is the last visited pair; (0, 0) is a virtual position before (0, 1).
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_q).floor();
        let mut step = if skip.is_finite() && skip < usize::MAX as f64 / 4.0 {
            skip as usize + 1
        } else {
            usize::MAX / 4
        };
        loop {
            let left = n - 1 - j;
            if step <= left {
                j += step;
                break;
            }
            step -= left;
            i += 1;
            if i >= n - 1 {
                return;
            }
            j = i;
        }
        f(i, j);
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub graph: MultiViewGraph,
    pub communities: Vec<usize>,
    pub labels: LabelSet,
    pub warnings: Vec<Warning>,
}

/// Generates the graph and community labels (with `num_folds` stratified folds).
pub fn generate_synthetic(spec: &SynthSpec, num_folds: usize) -> Result<Synthetic> {
    let mut warnings = spec.validate()?;
    let n = spec.num_nodes;
    let mut rng = rng::stream(spec.seed, Stream::Synthetic, &[]);

    let membership = spec.membership();
    let communities: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (c, p) in membership.iter().enumerate() {
                acc += p;
                if u < acc {
                    return c;
                }
            }
            membership.len() - 1
        })
        .collect();

    let mut builder = GraphBuilder::new(NodeNames::numbered(n), spec.num_views);
    let planted = |builder: &mut GraphBuilder, v: usize, rng: &mut rng::StreamRng| {
        let (pi, po) = (spec.p_intra[v], spec.p_inter[v]);
        let pmax = pi.max(po);
        if pmax <= 0.0 {
            return;
        }
        let mut kept = Vec::new();
        bernoulli_pairs(n, pmax, rng, |a, b| kept.push((a, b)));
        for (a, b) in kept {
            let p = if communities[a] == communities[b] {
                pi
            } else {
                po
            };
            if p >= pmax || rng.gen::<f64>() < p / pmax {
                builder.add(v, a, b);
            }
        }
    };

    planted(&mut builder, 0, &mut rng);
    let base = builder.edges(0);
    for v in 1..spec.num_views {
        for &(a, b) in &base {
            if rng.gen::<f64>() < spec.cross_copy {
                builder.add(v, a, b);
            }
        }
        planted(&mut builder, v, &mut rng);
        let mut noise = Vec::new();
        bernoulli_pairs(n, spec.p_noise, &mut rng, |a, b| noise.push((a, b)));
        for (a, b) in noise {
            builder.add(v, a, b);
        }
    }
    let graph = builder.finish();

    let (labels, label_warnings) = LabelSet::new(
        TaskKind::NodeClass,
        (0..n).map(Item::Node).collect(),
        communities.iter().map(|c| c.to_string()).collect(),
        num_folds,
        spec.seed,
    )?;
    warnings.extend(label_warnings);
    Ok(Synthetic {
        graph,
        communities,
        labels,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::second_order_ratio;

    #[test]
    fn geometric_skipping_visits_all_pairs_at_p_one_half() {
        let mut rng = rng::stream(1, Stream::Synthetic, &[]);
        let mut count = 0usize;
        let mut last = (0, 0);
        bernoulli_pairs(200, 0.5, &mut rng, |a, b| {
            assert!(a < b && b < 200);
            assert!((a, b) > last);
            last = (a, b);
            count += 1;
        });
        let total = 200 * 199 / 2;
        let sd = (total as f64 * 0.25).sqrt();
        assert!((count as f64 - total as f64 / 2.0).abs() < 5.0 * sd);
        let mut all = 0;
        bernoulli_pairs(10, 1.0, &mut rng, |_, _| all += 1);
        assert_eq!(all, 45);
    }

    #[test]
    fn full_copy_without_noise_gives_identical_views() {
        let spec = SynthSpec::copy_model(60, 3, 0.2, 0.02, 1.0, 0.0, 3);
        let s = generate_synthetic(&spec, 5).unwrap();
        for v in 1..3 {
            assert_eq!(
                s.graph.edges(v).collect::<Vec<_>>(),
                s.graph.edges(0).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SynthSpec::copy_model(80, 2, 0.2, 0.02, 0.5, 0.01, 9);
        let a = generate_synthetic(&spec, 5).unwrap();
        let b = generate_synthetic(&spec, 5).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn zero_copy_is_near_independent() {
        let spec = SynthSpec::copy_model(300, 2, 0.1, 0.1, 0.0, 0.1, 2);
        let s = generate_synthetic(&spec, 5).unwrap();
        let r = second_order_ratio(&s.graph, 0, 1).value().unwrap();
        assert!((0.8..1.25).contains(&r), "{r}");
        assert!((spec.expected_ratio(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = SynthSpec::copy_model(3, 2, 0.1, 0.1, 0.0, 0.1, 2);
        assert!(spec.validate().is_err());
        spec.num_nodes = 10;
        spec.cross_copy = 1.5;
        assert!(spec.validate().is_err());
        spec.cross_copy = 0.5;
        spec.p_intra = vec![0.0, 0.0];
        spec.p_inter = vec![0.0, 0.0];
        spec.p_noise = 0.0;
        let w = spec.validate().unwrap();
        assert!(matches!(w[0], Warning::LowDegree { .. }));
    }
}
