//! The MANE training loop.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MultiViewGraph;
use crate::real::Real;
use crate::rng::{self, Stream, StreamRng};
use crate::walk::PairCorpus;

use super::adam::{
    AdamCoefs, AdamConfig, DenseStore, LazyAdam, ParamStore, SharedParams, SharedStore,
};
use super::exact::{exact_objective, LossBreakdown};
use super::loss::{exact_step, sampled_step, Scratch, Term};
use super::noise::NoiseDist;
use super::tables::EmbeddingTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Full softmax over all nodes for every term; only practical for small graphs.
    ExactSoftmax,
    NegativeSampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Weight of first-order collaboration.
    pub alpha: f64,
    /// Weight of second-order collaboration.
    pub beta: f64,
    /// Final embedding dimension; each view gets `dim / |V|`.
    pub dim: usize,
    /// Negatives per positive.
    pub negatives: usize,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub seed: u64,
    pub objective: Objective,
    /// 1 = deterministic. More workers update shared tables without locks.
    pub threads: usize,
    /// Exact epoch losses are computed only for graphs up to this many nodes.
    pub exact_loss_max_nodes: usize,
    /// Stop once the epoch loss improves by less than this relative amount.
    pub early_stop: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 1.0,
            beta: 1.0,
            dim: 128,
            negatives: 10,
            adam: AdamConfig::default(),
            epochs: 10,
            seed: 42,
            objective: Objective::NegativeSampling,
            threads: 1,
            exact_loss_max_nodes: 1000,
            early_stop: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, num_views: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("alpha and beta must be non-negative");
        }
        if self.dim < num_views {
            return bad("dim must be at least the number of views");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if self.threads < 1 {
            return bad("threads must be >= 1");
        }
        if !(self.adam.lr > 0.0)
            || !(0.0..1.0).contains(&self.adam.beta1)
            || !(0.0..1.0).contains(&self.adam.beta2)
        {
            return bad("invalid Adam settings");
        }
        Ok(())
    }
}

/// Per-epoch losses. `exact` tells whether the components are the full
/// softmax objective at epoch end or the sampled surrogate summed during it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub total: f64,
    pub div: f64,
    pub c1: f64,
    pub c2: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTrace(pub Vec<EpochLoss>);

impl LossTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.0.iter().map(|e| e.total).collect()
    }

    /// CSV with header `epoch,total,div,c1,c2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,total,div,c1,c2")?;
        for e in &self.0 {
            writeln!(out, "{},{},{},{},{}", e.epoch, e.total, e.div, e.c1, e.c2)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Read-only inputs of a pair update.
struct PairContext<'a> {
    cfg: &'a TrainConfig,
    noise: &'a [NoiseDist],
    uniform: NoiseDist,
    num_nodes: usize,
    num_views: usize,
}

struct Workspace<T> {
    scratch: Scratch<T>,
    negs: Vec<usize>,
    sums: LossBreakdown,
}

impl<T: Real> Workspace<T> {
    fn new(dim: usize) -> Self {
        Workspace {
            scratch: Scratch::new(dim),
            negs: Vec::new(),
            sums: LossBreakdown::default(),
        }
    }
}

impl PairContext<'_> {
    fn step<T: Real, S: ParamStore<T>>(
        &self,
        store: &mut S,
        term: Term,
        weight: f64,
        negatives: Option<(&NoiseDist, usize, &mut StreamRng)>,
        ws: &mut Workspace<T>,
    ) -> Option<f64> {
        match self.cfg.objective {
            Objective::NegativeSampling => {
                let (dist, exclude, rng) = negatives.expect("sampled step needs a noise source");
                dist.negatives(self.cfg.negatives, exclude, rng, &mut ws.negs);
                sampled_step(store, term, &ws.negs, T::lit(weight), &mut ws.scratch)
            }
            Objective::ExactSoftmax => {
                exact_step(store, term, self.num_nodes, T::lit(weight), &mut ws.scratch)
            }
        }
    }

    /// Updates for one intra-view pair: the diversity term, then for every
    /// other view the first- and second-order collaboration terms.
    fn pair<T: Real, S: ParamStore<T>>(
        &self,
        store: &mut S,
        view: usize,
        (i, j): (usize, usize),
        div_rng: &mut StreamRng,
        collab_rng: &mut StreamRng,
        ws: &mut Workspace<T>,
    ) -> bool {
        let noise = &self.noise[view];
        let term = Term::Diversity {
            view,
            center: i,
            context: j,
        };
        let Some(l) = self.step(store, term, 1.0, Some((noise, j, div_rng)), ws) else {
            return false;
        };
        ws.sums.div += l;

        for other in (0..self.num_views).filter(|&o| o != view) {
            if self.cfg.alpha > 0.0 {
                let term = Term::FirstOrder {
                    view,
                    other,
                    node: i,
                };
                let Some(l) = self.step(
                    store,
                    term,
                    self.cfg.alpha,
                    Some((&self.uniform, i, &mut *collab_rng)),
                    ws,
                ) else {
                    return false;
                };
                ws.sums.c1 += l;
            }
            if self.cfg.beta > 0.0 {
                let term = Term::SecondOrder {
                    view,
                    other,
                    center: i,
                    context: j,
                };
                let Some(l) = self.step(
                    store,
                    term,
                    self.cfg.beta,
                    Some((noise, j, &mut *collab_rng)),
                    ws,
                ) else {
                    return false;
                };
                ws.sums.c2 += l;
            }
        }
        true
    }
}

/// Stateful trainer; one call to [`Trainer::run_epoch`] is one sweep over
/// every view's shuffled pairs.
pub struct Trainer<'a, T: Real> {
    cfg: TrainConfig,
    corpus: &'a PairCorpus,
    num_nodes: usize,
    tables: EmbeddingTables<T>,
    adam: LazyAdam<T>,
    pairs: Vec<Vec<(u32, u32)>>,
    noise: Vec<NoiseDist>,
    div_rngs: Vec<StreamRng>,
    collab_rngs: Vec<StreamRng>,
    epoch: usize,
    trace: LossTrace,
}

impl<'a, T: Real> Trainer<'a, T> {
    pub fn new(graph: &MultiViewGraph, corpus: &'a PairCorpus, cfg: TrainConfig) -> Result<Self> {
        let views = graph.num_views();
        cfg.validate(views)?;
        if corpus.num_views() != views {
            return Err(Error::Invalid(
                "corpus and graph have different view counts".into(),
            ));
        }
        let n = graph.num_nodes();
        let tables = EmbeddingTables::init(views, n, cfg.dim, cfg.seed)?;
        let adam = LazyAdam::new(tables.num_rows(), tables.dim());
        Ok(Trainer {
            noise: corpus
                .pairs
                .iter()
                .map(|p| NoiseDist::from_pairs(n, p))
                .collect(),
            pairs: corpus.pairs.clone(),
            div_rngs: (0..views)
                .map(|v| rng::stream(cfg.seed, Stream::Diversity, &[v as u64]))
                .collect(),
            collab_rngs: (0..views)
                .map(|v| rng::stream(cfg.seed, Stream::Collaboration, &[v as u64]))
                .collect(),
            cfg,
            corpus,
            num_nodes: n,
            tables,
            adam,
            epoch: 0,
            trace: LossTrace::default(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &EmbeddingTables<T> {
        &self.tables
    }

    pub fn trace(&self) -> &LossTrace {
        &self.trace
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub(crate) fn dense_store(&mut self) -> DenseStore<'_, T> {
        DenseStore {
            tables: &mut self.tables,
            adam: &mut self.adam,
            coefs: AdamCoefs::from(self.cfg.adam),
        }
    }

    pub fn into_parts(self) -> (EmbeddingTables<T>, LossTrace) {
        (self.tables, self.trace)
    }

    /// Runs one epoch and records its loss.
    pub fn run_epoch(&mut self) -> Result<EpochLoss> {
        self.epoch += 1;
        let sums = if self.cfg.threads > 1 {
            self.sweep_parallel()?
        } else {
            self.sweep()?
        };
        let (breakdown, exact) = if self.num_nodes <= self.cfg.exact_loss_max_nodes {
            (exact_objective(&self.tables, self.corpus), true)
        } else {
            (sums, false)
        };
        let record = EpochLoss {
            epoch: self.epoch,
            total: breakdown.total(self.cfg.alpha, self.cfg.beta),
            div: breakdown.div,
            c1: breakdown.c1,
            c2: breakdown.c2,
            exact,
        };
        log::info!(
            "epoch {}: total {:.6} (div {:.6}, c1 {:.6}, c2 {:.6}{})",
            record.epoch,
            record.total,
            record.div,
            record.c1,
            record.c2,
            if exact { "" } else { ", sampled" }
        );
        self.trace.0.push(record);
        Ok(record)
    }

    fn sweep(&mut self) -> Result<LossBreakdown> {
        let ctx = PairContext {
            cfg: &self.cfg,
            noise: &self.noise,
            uniform: NoiseDist::uniform(self.num_nodes),
            num_nodes: self.num_nodes,
            num_views: self.tables.num_views(),
        };
        let mut store = DenseStore {
            tables: &mut self.tables,
            adam: &mut self.adam,
            coefs: AdamCoefs::from(self.cfg.adam),
        };
        let mut ws = Workspace::new(store.tables.dim());
        for v in 0..self.pairs.len() {
            let pairs = &mut self.pairs[v];
            pairs.shuffle(&mut self.div_rngs[v]);
            for (step, &(i, j)) in pairs.iter().enumerate() {
                let ok = ctx.pair(
                    &mut store,
                    v,
                    (i as usize, j as usize),
                    &mut self.div_rngs[v],
                    &mut self.collab_rngs[v],
                    &mut ws,
                );
                if !ok {
                    return Err(Error::NonFinite {
                        epoch: self.epoch,
                        view: v,
                        step,
                    });
                }
            }
        }
        Ok(ws.sums)
    }

    fn sweep_parallel(&mut self) -> Result<LossBreakdown> {
        let threads = self.cfg.threads;
        let shared = SharedParams::from_dense(&self.tables, &self.adam);
        let coefs = AdamCoefs::<T>::from(self.cfg.adam);
        let dim = self.tables.dim();
        let ctx = PairContext {
            cfg: &self.cfg,
            noise: &self.noise,
            uniform: NoiseDist::uniform(self.num_nodes),
            num_nodes: self.num_nodes,
            num_views: self.tables.num_views(),
        };
        let mut total = LossBreakdown::default();
        for v in 0..self.pairs.len() {
            self.pairs[v].shuffle(&mut self.div_rngs[v]);
            let pairs = &self.pairs[v];
            let chunk = pairs.len().div_ceil(threads).max(1);
            let epoch = self.epoch;
            let results: Vec<std::result::Result<LossBreakdown, usize>> = std::thread::scope(|s| {
                let handles: Vec<_> = pairs
                    .chunks(chunk)
                    .enumerate()
                    .map(|(w, part)| {
                        let ctx = &ctx;
                        let shared = &shared;
                        s.spawn(move || {
                            let mut rng = rng::stream(
                                ctx.cfg.seed,
                                Stream::Worker,
                                &[epoch as u64, v as u64, w as u64],
                            );
                            let mut collab = rng.clone();
                            let mut store = SharedStore { shared, coefs };
                            let mut ws = Workspace::<T>::new(dim);
                            for (k, &(i, j)) in part.iter().enumerate() {
                                if !ctx.pair(
                                    &mut store,
                                    v,
                                    (i as usize, j as usize),
                                    &mut rng,
                                    &mut collab,
                                    &mut ws,
                                ) {
                                    return Err(w * chunk + k);
                                }
                            }
                            Ok(ws.sums)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            for r in results {
                match r {
                    Ok(s) => {
                        total.div += s.div;
                        total.c1 += s.c1;
                        total.c2 += s.c2;
                    }
                    Err(step) => {
                        return Err(Error::NonFinite {
                            epoch,
                            view: v,
                            step,
                        })
                    }
                }
            }
        }
        shared.write_back(&mut self.tables, &mut self.adam);
        Ok(total)
    }

    /// True when the last epoch improved on the previous one by less than
    /// the configured early-stop tolerance.
    pub fn converged(&self) -> bool {
        let Some(tol) = self.cfg.early_stop else {
            return false;
        };
        match self.trace.0.as_slice() {
            [.., prev, last] => (prev.total - last.total).abs() <= tol * prev.total.abs(),
            _ => false,
        }
    }
}

pub struct TrainOutput<T> {
    pub tables: EmbeddingTables<T>,
    pub trace: LossTrace,
}

/// Trains MANE on a prepared corpus.
pub fn train<T: Real>(
    graph: &MultiViewGraph,
    corpus: &PairCorpus,
    cfg: &TrainConfig,
) -> Result<TrainOutput<T>> {
    let mut trainer = Trainer::<T>::new(graph, corpus, cfg.clone())?;
    for _ in 0..cfg.epochs {
        trainer.run_epoch()?;
        if trainer.converged() {
            log::info!("early stop after epoch {}", trainer.epoch());
            break;
        }
    }
    let (tables, trace) = trainer.into_parts();
    Ok(TrainOutput { tables, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::WalkConfig;

    fn small_graph() -> MultiViewGraph {
        let ring: Vec<_> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        let chords: Vec<_> = (0..12).map(|i| (i, (i + 5) % 12)).collect();
        MultiViewGraph::from_edges(12, &[ring, chords]).unwrap()
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            dim: 8,
            negatives: 3,
            epochs: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn deterministic_single_thread() {
        let g = small_graph();
        let corpus = PairCorpus::build(&g, &WalkConfig::default(), 1).unwrap();
        let a = train::<f32>(&g, &corpus, &cfg()).unwrap();
        let b = train::<f32>(&g, &corpus, &cfg()).unwrap();
        assert_eq!(a.tables, b.tables);
        assert_eq!(a.trace, b.trace);
        assert!(a.tables.all_finite());
        assert_eq!(a.trace.0.len(), 3);
        assert!(a.trace.0.iter().all(|e| e.exact));
    }

    #[test]
    fn parallel_mode_runs_and_stays_finite() {
        let g = small_graph();
        let corpus = PairCorpus::build(&g, &WalkConfig::default(), 1).unwrap();
        let out = train::<f32>(
            &g,
            &corpus,
            &TrainConfig {
                threads: 3,
                ..cfg()
            },
        )
        .unwrap();
        assert!(out.tables.all_finite());
        assert_eq!(out.trace.0.len(), 3);
    }

    #[test]
    fn exact_softmax_objective_trains() {
        let g = small_graph();
        let corpus = PairCorpus::build(
            &g,
            &WalkConfig {
                walks_per_node: 1,
                ..WalkConfig::default()
            },
            1,
        )
        .unwrap();
        let c = TrainConfig {
            objective: Objective::ExactSoftmax,
            ..cfg()
        };
        let out = train::<f64>(&g, &corpus, &c).unwrap();
        let t = out.trace.totals();
        assert!(t[2] < t[0]);
    }

    #[test]
    fn single_view_skips_collaboration() {
        let g = small_graph().select_views(&[0]);
        let corpus = PairCorpus::build(&g, &WalkConfig::default(), 1).unwrap();
        let out = train::<f64>(&g, &corpus, &cfg()).unwrap();
        assert!(out.trace.0.iter().all(|e| e.c1 == 0.0 && e.c2 == 0.0));
    }

    #[test]
    fn rejects_bad_config() {
        let g = small_graph();
        let corpus = PairCorpus::build(&g, &WalkConfig::default(), 1).unwrap();
        let bad = TrainConfig { dim: 1, ..cfg() };
        assert!(matches!(
            train::<f32>(&g, &corpus, &bad),
            Err(Error::Config(_))
        ));
        let bad = TrainConfig {
            alpha: -1.0,
            ..cfg()
        };
        assert!(train::<f32>(&g, &corpus, &bad).is_err());
    }

    #[test]
    fn diverging_learning_rate_is_reported() {
        let g = small_graph();
        let corpus = PairCorpus::build(&g, &WalkConfig::default(), 1).unwrap();
        let c = TrainConfig {
            adam: AdamConfig {
                lr: 1e300,
                ..AdamConfig::default()
            },
            ..cfg()
        };
        let err = train::<f32>(&g, &corpus, &c).err().expect("must fail");
        assert!(matches!(err, Error::NonFinite { epoch: 1, .. }), "{err}");
    }

    #[test]
    fn loss_csv_format() {
        let trace = LossTrace(vec![EpochLoss {
            epoch: 1,
            total: 3.0,
            div: 1.0,
            c1: 1.0,
            c2: 1.0,
            exact: true,
        }]);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,total,div,c1,c2\n1,3,1,1,1\n"
        );
    }
}
