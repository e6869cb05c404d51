//! Cross-view link co-occurrence ratio.
//!
//! For views `v != w` the ratio compares how often a node pair linked in `v`
//! is also linked in `w` with how often an unlinked pair of `v` is linked in
//! `w`, counting over all `N (N - 1) / 2` node pairs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MultiViewGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ratio {
    Value(f64),
    /// The first view has no edges.
    UndefinedNumerator,
    /// Every edge of the second view is also in the first.
    UndefinedDenominator,
}

impl Ratio {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ratio::Value(x) => Some(*x),
            _ => None,
        }
    }

    fn label(&self) -> String {
        match self {
            Ratio::Value(x) => x.to_string(),
            Ratio::UndefinedNumerator => "undefined-numerator".into(),
            Ratio::UndefinedDenominator => "undefined-denominator".into(),
        }
    }
}

/// Number of node pairs linked in both views.
pub fn shared_edges(graph: &MultiViewGraph, v: usize, w: usize) -> usize {
    graph
        .edges(v)
        .filter(|&(a, b)| graph.has_edge(w, a, b))
        .count()
}

/// `P(linked in w | linked in v) / P(linked in w | not linked in v)`.
pub fn second_order_ratio(graph: &MultiViewGraph, v: usize, w: usize) -> Ratio {
    assert_ne!(v, w, "ratio needs two distinct views");
    let in_v = graph.edge_count(v);
    if in_v == 0 {
        return Ratio::UndefinedNumerator;
    }
    let n = graph.num_nodes() as u64;
    let all_pairs = n * n.saturating_sub(1) / 2;
    let both = shared_edges(graph, v, w);
    let only_w = graph.edge_count(w) - both;
    let not_v = all_pairs - in_v as u64;
    if only_w == 0 || not_v == 0 {
        return Ratio::UndefinedDenominator;
    }
    let numerator = both as f64 / in_v as f64;
    let denominator = only_w as f64 / not_v as f64;
    Ratio::Value(numerator / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSummary {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub median: Option<f64>,
    pub undefined: usize,
}

/// Ratios for every ordered pair of distinct views; the diagonal is `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioMatrix {
    pub views: Vec<String>,
    pub entries: Vec<Vec<Option<Ratio>>>,
}

impl RatioMatrix {
    pub fn get(&self, v: usize, w: usize) -> Option<Ratio> {
        self.entries[v][w]
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = Ratio> + '_ {
        self.entries.iter().flatten().filter_map(|r| *r)
    }

    pub fn summary(&self) -> RatioSummary {
        let mut values: Vec<f64> = self.off_diagonal().filter_map(|r| r.value()).collect();
        let undefined = self.off_diagonal().count() - values.len();
        values.sort_by(f64::total_cmp);
        let median = match values.len() {
            0 => None,
            n if n % 2 == 1 => Some(values[n / 2]),
            n => Some((values[n / 2 - 1] + values[n / 2]) / 2.0),
        };
        RatioSummary {
            min: values.first().copied(),
            max: values.last().copied(),
            median,
            undefined,
        }
    }

    /// Square CSV: header row of view names, `-` on the diagonal.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "view,{}", self.views.join(","))?;
        for (v, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|r| r.map(|r| r.label()).unwrap_or_else(|| "-".into()))
                .collect();
            writeln!(out, "{},{}", self.views[v], cells.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, csv: &Path, json: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        std::fs::write(csv, buf).map_err(|e| Error::io(csv, e))?;
        let summary = serde_json::to_string_pretty(&self.summary()).expect("serializable");
        std::fs::write(json, summary).map_err(|e| Error::io(json, e))
    }
}

pub fn ratio_matrix(graph: &MultiViewGraph) -> Result<RatioMatrix> {
    let views = graph.num_views();
    if views < 2 {
        return Err(Error::Invalid("need >= 2 views".into()));
    }
    let entries = (0..views)
        .map(|v| {
            (0..views)
                .map(|w| (v != w).then(|| second_order_ratio(graph, v, w)))
                .collect()
        })
        .collect();
    Ok(RatioMatrix {
        views: graph.view_names().to_vec(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over every unordered node pair.
    fn ratio_by_enumeration(g: &MultiViewGraph, v: usize, w: usize) -> Option<f64> {
        let n = g.num_nodes();
        let (mut in_v, mut in_both, mut out_v, mut out_v_in_w) = (0.0, 0.0, 0.0, 0.0);
        for a in 0..n {
            for b in a + 1..n {
                if g.has_edge(v, a, b) {
                    in_v += 1.0;
                    if g.has_edge(w, a, b) {
                        in_both += 1.0;
                    }
                } else {
                    out_v += 1.0;
                    if g.has_edge(w, a, b) {
                        out_v_in_w += 1.0;
                    }
                }
            }
        }
        (in_v > 0.0 && out_v_in_w > 0.0).then(|| (in_both / in_v) / (out_v_in_w / out_v))
    }

    #[test]
    fn four_node_example() {
        let g =
            MultiViewGraph::from_edges(4, &[vec![(0, 1), (1, 2)], vec![(0, 1), (2, 3)]]).unwrap();
        assert_eq!(ratio_by_enumeration(&g, 0, 1), Some(2.0));
        assert_eq!(second_order_ratio(&g, 0, 1), Ratio::Value(2.0));
    }

    #[test]
    fn identical_views_flag_denominator() {
        let e = vec![(0, 1), (1, 2)];
        let g = MultiViewGraph::from_edges(4, &[e.clone(), e]).unwrap();
        assert_eq!(second_order_ratio(&g, 0, 1), Ratio::UndefinedDenominator);
        let g = MultiViewGraph::from_edges(3, &[vec![], vec![(0, 1)]]).unwrap();
        assert_eq!(second_order_ratio(&g, 0, 1), Ratio::UndefinedNumerator);
    }

    #[test]
    fn matrix_shape_summary_and_csv() {
        let g =
            MultiViewGraph::from_edges(4, &[vec![(0, 1), (1, 2)], vec![(0, 1), (2, 3)]]).unwrap();
        let m = ratio_matrix(&g).unwrap();
        assert_eq!(m.off_diagonal().count(), 2);
        assert!(m.get(0, 0).is_none());
        let s = m.summary();
        assert_eq!(s.undefined, 0);
        assert!(s.min.unwrap() <= s.median.unwrap() && s.median.unwrap() <= s.max.unwrap());
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("view,view0,view1\nview0,-,2\n"), "{text}");
        assert!(ratio_matrix(&g.select_views(&[0])).is_err());
    }

    #[test]
    fn agrees_with_enumeration_on_irregular_graph() {
        let v0: Vec<_> = (0..30)
            .map(|i| (i, (i * 3 + 1) % 30))
            .filter(|(a, b)| a != b)
            .collect();
        let v1: Vec<_> = (0..30)
            .map(|i| (i, (i * 3 + 1) % 30))
            .filter(|(a, b)| a != b && a % 4 != 0)
            .chain((0..30).map(|i| (i, (i + 7) % 30)))
            .collect();
        let g = MultiViewGraph::from_edges(30, &[v0, v1]).unwrap();
        for (v, w) in [(0, 1), (1, 0)] {
            let r = second_order_ratio(&g, v, w).value().unwrap();
            let b = ratio_by_enumeration(&g, v, w).unwrap();
            assert!((r - b).abs() < 1e-12 * b);
        }
    }
}
