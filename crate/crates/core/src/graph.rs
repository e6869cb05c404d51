//! Multi-view graph model and edge-list ingestion.
//!
//! All views share one node namespace. Edges are undirected and unweighted;
//! each view stores sorted, deduplicated neighbor lists.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Bidirectional node name table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeNames {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeNames {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate node name `{name}`")));
            }
        }
        Ok(NodeNames { names, index })
    }

    /// Names `0..n` as decimal strings.
    pub fn numbered(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect()).expect("distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.get(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Reads a "name<TAB>index" sidecar. Indices must form `0..n`.
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries: Vec<(usize, String)> = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(name), Some(idx)) = (cols.next(), cols.next()) else {
                return Err(Error::parse(path, lineno + 1, "expected name<TAB>index"));
            };
            let idx = idx
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
            entries.push((idx, name.to_string()));
        }
        entries.sort();
        if entries.iter().enumerate().any(|(k, (idx, _))| *idx != k) {
            return Err(Error::parse(
                path,
                0,
                "node indices are not contiguous from 0",
            ));
        }
        Self::new(entries.into_iter().map(|(_, n)| n).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (i, name) in self.names.iter().enumerate() {
            writeln!(out, "{name}\t{i}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Non-fatal problems noticed while loading input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    DuplicateEdge {
        view: usize,
        line: usize,
    },
    SelfLoop {
        view: usize,
        line: usize,
    },
    ExtraColumns {
        view: usize,
        line: usize,
    },
    SmallClass {
        class: String,
        items: usize,
        folds: usize,
    },
    LowDegree {
        expected: String,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DuplicateEdge { view, line } => {
                write!(f, "view {view}, line {line}: duplicate edge ignored")
            }
            Warning::SelfLoop { view, line } => {
                write!(f, "view {view}, line {line}: self-loop dropped")
            }
            Warning::ExtraColumns { view, line } => {
                write!(
                    f,
                    "view {view}, line {line}: columns beyond src/dst ignored"
                )
            }
            Warning::SmallClass {
                class,
                items,
                folds,
            } => write!(
                f,
                "class `{class}` has {items} items for {folds} folds; assigned round-robin"
            ),
            Warning::LowDegree { expected } => {
                write!(f, "expected degree {expected} is below 1")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeMapPolicy {
    /// Collect every name seen in any view and assign contiguous indices.
    /// Names that all parse as integers are ordered numerically, otherwise
    /// lexicographically, so the mapping does not depend on line order.
    DenseReindex,
    /// Every name must already exist in the given namespace.
    Strict(NodeNames),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiViewGraph {
    names: NodeNames,
    view_names: Vec<String>,
    adjacency: Vec<Vec<Vec<u32>>>,
    edge_count: Vec<usize>,
}

impl MultiViewGraph {
    /// Builds a graph from per-view edge lists over `num_nodes` numbered nodes.
    /// Self-loops and duplicates are dropped silently; use [`load_graph`] for
    /// file input with diagnostics.
    pub fn from_edges(num_nodes: usize, views: &[Vec<(usize, usize)>]) -> Result<Self> {
        let mut builder = GraphBuilder::new(NodeNames::numbered(num_nodes), views.len());
        for (v, edges) in views.iter().enumerate() {
            for &(a, b) in edges {
                if a >= num_nodes || b >= num_nodes {
                    return Err(Error::Invalid(format!(
                        "edge ({a}, {b}) out of range for {num_nodes} nodes"
                    )));
                }
                builder.add(v, a, b);
            }
        }
        Ok(builder.finish())
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn num_views(&self) -> usize {
        self.adjacency.len()
    }

    pub fn names(&self) -> &NodeNames {
        &self.names
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn set_view_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.num_views());
        self.view_names = names;
    }

    pub fn neighbors(&self, view: usize, node: usize) -> &[u32] {
        &self.adjacency[view][node]
    }

    pub fn degree(&self, view: usize, node: usize) -> usize {
        self.adjacency[view][node].len()
    }

    pub fn edge_count(&self, view: usize) -> usize {
        self.edge_count[view]
    }

    pub fn edge_counts(&self) -> &[usize] {
        &self.edge_count
    }

    pub fn total_edges(&self) -> usize {
        self.edge_count.iter().sum()
    }

    pub fn has_edge(&self, view: usize, a: usize, b: usize) -> bool {
        self.adjacency[view][a].binary_search(&(b as u32)).is_ok()
    }

    /// Edges of one view as `(a, b)` with `a < b`, in sorted order.
    pub fn edges(&self, view: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[view]
            .iter()
            .enumerate()
            .flat_map(|(a, nbrs)| {
                nbrs.iter()
                    .map(move |&b| (a, b as usize))
                    .filter(|&(a, b)| a < b)
            })
    }

    /// Keeps only the listed views, in the given order.
    pub fn select_views(&self, views: &[usize]) -> Self {
        MultiViewGraph {
            names: self.names.clone(),
            view_names: views.iter().map(|&v| self.view_names[v].clone()).collect(),
            adjacency: views.iter().map(|&v| self.adjacency[v].clone()).collect(),
            edge_count: views.iter().map(|&v| self.edge_count[v]).collect(),
        }
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        for (v, adj) in self.adjacency.iter().enumerate() {
            if adj.len() != n {
                return Err(Error::Invalid(format!(
                    "view {v}: adjacency length mismatch"
                )));
            }
            let mut half = 0usize;
            for (a, nbrs) in adj.iter().enumerate() {
                for w in nbrs.windows(2) {
                    if w[0] >= w[1] {
                        return Err(Error::Invalid(format!(
                            "view {v}: unsorted or duplicate neighbor of {a}"
                        )));
                    }
                }
                for &b in nbrs {
                    let b = b as usize;
                    if b >= n || b == a || !self.has_edge(v, b, a) {
                        return Err(Error::Invalid(format!("view {v}: bad edge ({a}, {b})")));
                    }
                }
                half += nbrs.len();
            }
            if half != 2 * self.edge_count[v] {
                return Err(Error::Invalid(format!("view {v}: edge count mismatch")));
            }
        }
        Ok(())
    }

    /// Writes one edge file per view (`<stem>.<view>.tsv`) plus a node map.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::with_capacity(self.num_views());
        for v in 0..self.num_views() {
            let path = dir.join(format!("{stem}.{v}.tsv"));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut out = BufWriter::new(file);
            for (a, b) in self.edges(v) {
                writeln!(out, "{}\t{}", self.names.name(a), self.names.name(b))
                    .map_err(|e| Error::io(&path, e))?;
            }
            out.flush().map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        self.names.write(&dir.join(format!("{stem}.nodes.tsv")))?;
        Ok(paths)
    }
}

pub(crate) struct GraphBuilder {
    names: NodeNames,
    sets: Vec<Vec<BTreeSet<u32>>>,
}

impl GraphBuilder {
    pub(crate) fn new(names: NodeNames, num_views: usize) -> Self {
        let n = names.len();
        GraphBuilder {
            names,
            sets: (0..num_views).map(|_| vec![BTreeSet::new(); n]).collect(),
        }
    }

    /// Returns false if the edge was a self-loop or already present.
    pub(crate) fn add(&mut self, view: usize, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let fresh = self.sets[view][a].insert(b as u32);
        self.sets[view][b].insert(a as u32);
        fresh
    }

    pub(crate) fn edges(&self, view: usize) -> Vec<(usize, usize)> {
        self.sets[view]
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.range(a as u32 + 1..).map(move |&b| (a, b as usize)))
            .collect()
    }

    pub(crate) fn finish(self) -> MultiViewGraph {
        let num_views = self.sets.len();
        let adjacency: Vec<Vec<Vec<u32>>> = self
            .sets
            .into_iter()
            .map(|view| view.into_iter().map(|s| s.into_iter().collect()).collect())
            .collect();
        let edge_count = adjacency
            .iter()
            .map(|adj: &Vec<Vec<u32>>| adj.iter().map(Vec::len).sum::<usize>() / 2)
            .collect();
        MultiViewGraph {
            names: self.names,
            view_names: (0..num_views).map(|v| format!("view{v}")).collect(),
            adjacency,
            edge_count,
        }
    }
}

/// Lines of a tab-separated file, skipping blanks and `#` comments.
pub(crate) fn read_records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let cols = trimmed.split('\t').map(|s| s.trim().to_string()).collect();
        records.push((lineno + 1, cols));
    }
    Ok(records)
}

fn ordered_namespace(mut names: Vec<String>) -> Vec<String> {
    names.sort();
    names.dedup();
    if names.iter().all(|n| n.parse::<u64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<u64>().expect("checked"));
    }
    names
}

#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: MultiViewGraph,
    pub warnings: Vec<Warning>,
}

/// Loads one edge file per view.
pub fn load_graph(edge_files: &[PathBuf], policy: NodeMapPolicy) -> Result<LoadedGraph> {
    if edge_files.is_empty() {
        return Err(Error::Config("at least one view is required".into()));
    }
    let mut per_view = Vec::with_capacity(edge_files.len());
    for path in edge_files {
        let records = read_records(path)?;
        for (line, cols) in &records {
            if cols.len() < 2 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(Error::parse(path, *line, "expected src<TAB>dst"));
            }
        }
        per_view.push(records);
    }

    let names = match policy {
        NodeMapPolicy::Strict(names) => names,
        NodeMapPolicy::DenseReindex => {
            let all = per_view
                .iter()
                .flatten()
                .flat_map(|(_, cols)| cols[..2].iter().cloned())
                .collect();
            NodeNames::new(ordered_namespace(all))?
        }
    };

    let mut warnings = Vec::new();
    let mut builder = GraphBuilder::new(names, edge_files.len());
    for (v, records) in per_view.iter().enumerate() {
        for (line, cols) in records {
            let a = builder.names.lookup(&cols[0])?;
            let b = builder.names.lookup(&cols[1])?;
            if cols.len() > 2 {
                warnings.push(Warning::ExtraColumns {
                    view: v,
                    line: *line,
                });
            }
            if a == b {
                warnings.push(Warning::SelfLoop {
                    view: v,
                    line: *line,
                });
            } else if !builder.add(v, a, b) {
                warnings.push(Warning::DuplicateEdge {
                    view: v,
                    line: *line,
                });
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut graph = builder.finish();
    graph.view_names = edge_files
        .iter()
        .enumerate()
        .map(|(v, p)| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("view{v}"))
        })
        .collect();
    graph.validate()?;
    Ok(LoadedGraph { graph, warnings })
}
