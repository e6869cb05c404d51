//! Node and node-pair labels with stratified cross-validation folds.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{read_records, NodeNames, Warning};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    NodeClass,
    PairClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Node(usize),
    Pair(usize, usize),
}

impl Item {
    pub fn nodes(&self) -> (usize, Option<usize>) {
        match *self {
            Item::Node(i) => (i, None),
            Item::Pair(i, j) => (i, Some(j)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    pub task: TaskKind,
    pub items: Vec<Item>,
    /// Dense class id per item.
    pub classes: Vec<usize>,
    pub class_names: Vec<String>,
    pub folds: Vec<usize>,
    pub num_folds: usize,
}

impl LabelSet {
    /// Builds a label set from already-resolved items and assigns folds.
    pub fn new(
        task: TaskKind,
        items: Vec<Item>,
        class_names_per_item: Vec<String>,
        num_folds: usize,
        seed: u64,
    ) -> Result<(Self, Vec<Warning>)> {
        assert_eq!(items.len(), class_names_per_item.len());
        let class_names: Vec<String> = {
            let mut c = class_names_per_item.clone();
            c.sort();
            c.dedup();
            if c.iter().all(|n| n.parse::<i64>().is_ok()) {
                c.sort_by_key(|n| n.parse::<i64>().expect("checked"));
            }
            c
        };
        let lookup: BTreeMap<&str, usize> = class_names
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        let classes: Vec<usize> = class_names_per_item
            .iter()
            .map(|n| lookup[n.as_str()])
            .collect();
        let (folds, warnings) = stratified_folds(&classes, &class_names, num_folds, seed)?;
        Ok((
            LabelSet {
                task,
                items,
                classes,
                class_names,
                folds,
                num_folds,
            },
            warnings,
        ))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Indices of items in every fold except `held_out`.
    pub fn train_indices(&self, held_out: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.folds[k] != held_out)
            .collect()
    }

    pub fn test_indices(&self, held_out: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.folds[k] == held_out)
            .collect()
    }

    /// The subset of items at `indices`, keeping class ids and folds.
    pub fn subset(&self, indices: &[usize]) -> LabelSet {
        LabelSet {
            task: self.task,
            items: indices.iter().map(|&k| self.items[k]).collect(),
            classes: indices.iter().map(|&k| self.classes[k]).collect(),
            class_names: self.class_names.clone(),
            folds: indices.iter().map(|&k| self.folds[k]).collect(),
            num_folds: self.num_folds,
        }
    }
}

/// Stratified fold assignment.
///
/// Items of each class are shuffled and dealt round-robin; the dealing cursor
/// carries over between classes so that small classes land in distinct folds.
pub fn stratified_folds(
    classes: &[usize],
    class_names: &[String],
    num_folds: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Warning>)> {
    if num_folds < 2 {
        return Err(Error::Config("num_folds must be at least 2".into()));
    }
    if classes.len() < num_folds {
        return Err(Error::Invalid(format!(
            "{} labeled items cannot fill {num_folds} folds",
            classes.len()
        )));
    }
    let num_classes = class_names.len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (k, &c) in classes.iter().enumerate() {
        by_class[c].push(k);
    }
    let mut rng = rng::stream(seed, Stream::Folds, &[]);
    let mut folds = vec![0usize; classes.len()];
    let mut warnings = Vec::new();
    let mut cursor = 0usize;
    for (c, members) in by_class.iter_mut().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < num_folds {
            let w = Warning::SmallClass {
                class: class_names[c].clone(),
                items: members.len(),
                folds: num_folds,
            };
            log::warn!("{w}");
            warnings.push(w);
        }
        members.shuffle(&mut rng);
        for &k in members.iter() {
            folds[k] = cursor;
            cursor = (cursor + 1) % num_folds;
        }
    }
    Ok((folds, warnings))
}

#[derive(Debug)]
pub struct LoadedLabels {
    pub labels: LabelSet,
    pub warnings: Vec<Warning>,
}

/// Reads "node<TAB>class" or "src<TAB>dst<TAB>class" records.
pub fn load_labels(
    path: &Path,
    task: TaskKind,
    names: &NodeNames,
    num_folds: usize,
    seed: u64,
) -> Result<LoadedLabels> {
    let records = read_records(path)?;
    let width = match task {
        TaskKind::NodeClass => 2,
        TaskKind::PairClass => 3,
    };
    let mut items = Vec::with_capacity(records.len());
    let mut class_names = Vec::with_capacity(records.len());
    for (line, cols) in records {
        if cols.len() != width {
            return Err(Error::parse(
                path,
                line,
                format!(
                    "expected {width} tab-separated columns for {task:?}, found {}",
                    cols.len()
                ),
            ));
        }
        let item = match task {
            TaskKind::NodeClass => Item::Node(names.lookup(&cols[0])?),
            TaskKind::PairClass => Item::Pair(names.lookup(&cols[0])?, names.lookup(&cols[1])?),
        };
        items.push(item);
        class_names.push(cols[width - 1].clone());
    }
    if items.is_empty() {
        return Err(Error::Invalid(format!("{}: no labels", path.display())));
    }
    let (labels, warnings) = LabelSet::new(task, items, class_names, num_folds, seed)?;
    Ok(LoadedLabels { labels, warnings })
}
