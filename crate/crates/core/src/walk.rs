//! Truncated random walks and skip-gram (center, context) pairs per view.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MultiViewGraph;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Nodes per walk, including the start node.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_length: 10,
            walks_per_node: 5,
            window: 3,
            seed: 42,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 1 || self.walks_per_node < 1 || self.window < 1 {
            return Err(Error::Config(
                "walk_length, walks_per_node and window must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub type Walk = Vec<u32>;

fn walk_from<R: Rng>(
    graph: &MultiViewGraph,
    view: usize,
    start: usize,
    len: usize,
    rng: &mut R,
) -> Walk {
    let mut walk = Vec::with_capacity(len);
    let mut cur = start;
    walk.push(cur as u32);
    while walk.len() < len {
        let nbrs = graph.neighbors(view, cur);
        // Undirected: once a walk has left its start node it can always step back.
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())] as usize;
        walk.push(cur as u32);
    }
    walk
}

/// Samples `walks_per_node` walks from every node with non-zero degree in
/// `view`. Each walk has its own RNG stream keyed by (seed, view, node, walk),
/// so the result does not depend on `threads`.
pub fn sample_walks(
    graph: &MultiViewGraph,
    view: usize,
    cfg: &WalkConfig,
    threads: usize,
) -> Vec<Walk> {
    assert!(view < graph.num_views(), "view {view} out of range");
    let starts: Vec<usize> = (0..graph.num_nodes())
        .filter(|&i| graph.degree(view, i) > 0)
        .collect();
    let walks_for = |i: usize| -> Vec<Walk> {
        (0..cfg.walks_per_node)
            .map(|r| {
                let mut rng =
                    rng::stream(cfg.seed, Stream::Walk, &[view as u64, i as u64, r as u64]);
                walk_from(graph, view, i, cfg.walk_length, &mut rng)
            })
            .collect()
    };

    if threads <= 1 || starts.len() < 2 * threads {
        return starts.into_iter().flat_map(walks_for).collect();
    }
    let chunk = starts.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || part.iter().flat_map(|&i| walks_for(i)).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("walk worker panicked"))
            .collect()
    })
}

/// All (walk[p], walk[q]) with 0 < |p - q| <= window, in position order.
pub fn generate_pairs(walks: &[Walk], window: usize) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity(walks.iter().map(|w| pair_count(w.len(), window)).sum());
    for walk in walks {
        for p in 0..walk.len() {
            let lo = p.saturating_sub(window);
            let hi = (p + window).min(walk.len() - 1);
            for q in lo..=hi {
                if q != p {
                    pairs.push((walk[p], walk[q]));
                }
            }
        }
    }
    pairs
}

/// Number of pairs a walk of `len` nodes yields.
pub fn pair_count(len: usize, window: usize) -> usize {
    (0..len)
        .map(|p| p.min(window) + (len - 1 - p).min(window))
        .sum()
}

/// The materialized intra-view pair sets, one per view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCorpus {
    pub walks: Vec<Vec<Walk>>,
    pub pairs: Vec<Vec<(u32, u32)>>,
}

impl PairCorpus {
    pub fn build(graph: &MultiViewGraph, cfg: &WalkConfig, threads: usize) -> Result<Self> {
        cfg.validate()?;
        let walks: Vec<Vec<Walk>> = (0..graph.num_views())
            .map(|v| sample_walks(graph, v, cfg, threads))
            .collect();
        let pairs = walks
            .iter()
            .map(|w| generate_pairs(w, cfg.window))
            .collect();
        Ok(PairCorpus { walks, pairs })
    }

    pub fn num_views(&self) -> usize {
        self.pairs.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.pairs.iter().map(Vec::len).collect()
    }

    /// One walk per line, space-separated node indices; views separated by a
    /// `# view <v>` header.
    pub fn write_walks(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        for (v, walks) in self.walks.iter().enumerate() {
            writeln!(out, "# view {v}").map_err(io)?;
            for walk in walks {
                let line: Vec<String> = walk.iter().map(u32::to_string).collect();
                writeln!(out, "{}", line.join(" ")).map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_walk_is_forced() {
        let g = MultiViewGraph::from_edges(2, &[vec![(0, 1)]]).unwrap();
        let cfg = WalkConfig {
            walk_length: 3,
            walks_per_node: 1,
            window: 1,
            seed: 5,
        };
        let walks = sample_walks(&g, 0, &cfg, 1);
        assert_eq!(walks, vec![vec![0, 1, 0], vec![1, 0, 1]]);
    }

    #[test]
    fn isolated_node_has_no_walks() {
        let g = MultiViewGraph::from_edges(3, &[vec![(0, 1)]]).unwrap();
        let cfg = WalkConfig::default();
        let walks = sample_walks(&g, 0, &cfg, 1);
        assert_eq!(walks.len(), 2 * cfg.walks_per_node);
        assert!(walks
            .iter()
            .all(|w| w[0] != 2 && w.len() == cfg.walk_length));
    }

    #[test]
    fn star_first_step_is_uniform() {
        let g = MultiViewGraph::from_edges(4, &[vec![(0, 1), (0, 2), (0, 3)]]).unwrap();
        let cfg = WalkConfig {
            walk_length: 2,
            walks_per_node: 30_000,
            window: 1,
            seed: 9,
        };
        let walks = sample_walks(&g, 0, &cfg, 1);
        let mut counts = [0usize; 4];
        for w in walks.iter().filter(|w| w[0] == 0) {
            counts[w[1] as usize] += 1;
        }
        let expected = 10_000.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 2 degrees of freedom, p = 0.001 critical value
        assert!(chi2 < 13.82, "chi2 = {chi2}, counts = {counts:?}");
        for &c in &counts[1..] {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn pairs_window_one() {
        let pairs = generate_pairs(&[vec![0, 1, 2]], 1);
        assert_eq!(pairs, vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn pairs_window_two() {
        let pairs = generate_pairs(&[vec![0, 1, 2]], 2);
        assert_eq!(pairs.len(), 6);
        assert!(pairs.contains(&(0, 2)) && pairs.contains(&(2, 0)));
    }

    #[test]
    fn revisits_keep_self_pairs() {
        let pairs = generate_pairs(&[vec![7, 7, 7]], 1);
        assert_eq!(pairs, vec![(7, 7); 4]);
    }

    #[test]
    fn threads_do_not_change_walks() {
        let edges: Vec<(usize, usize)> = (0..50)
            .map(|i| (i, (i * 7 + 3) % 50))
            .filter(|(a, b)| a != b)
            .collect();
        let g = MultiViewGraph::from_edges(50, &[edges]).unwrap();
        let cfg = WalkConfig::default();
        assert_eq!(sample_walks(&g, 0, &cfg, 1), sample_walks(&g, 0, &cfg, 3));
    }
}
