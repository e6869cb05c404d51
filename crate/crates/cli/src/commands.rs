use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use mvembed::analysis::{ratio_matrix, Ratio};
use mvembed::attention::{train_plus as run_train_plus, write_attention_csv};
use mvembed::embed::{train as run_train, Embeddings};
use mvembed::eval::{
    build_link_instances, evaluate_embeddings, evaluate_plus, link_label_set, EvalConfig,
    EvalReport,
};
use mvembed::io::{read_embeddings_text, write_embeddings_binary, write_embeddings_text};
use mvembed::labels::{load_labels, LabelSet};
use mvembed::synth::{generate_synthetic, SynthSpec};
use mvembed::walk::PairCorpus;
use mvembed::{load_graph, MultiViewGraph, NodeMapPolicy, NodeNames, Real};

use crate::config::{
    out_dir, resolve_train, FileConfig, Precision, ResolvedTrain, Task, TrainFlags,
};
use crate::manifest::Manifest;
use crate::{CliError, GraphInput, LabelArgs, RunArgs};

const DEFAULT_FOLDS: usize = 5;
const DEFAULT_NEG_RATIO: usize = 5;

fn load_input(input: &GraphInput, manifest: &mut Manifest) -> Result<MultiViewGraph, CliError> {
    let policy = match &input.nodes {
        Some(path) => {
            manifest.input(path)?;
            NodeMapPolicy::Strict(NodeNames::read(path)?)
        }
        None => NodeMapPolicy::DenseReindex,
    };
    let loaded = load_graph(&input.views, policy)?;
    for path in &input.views {
        manifest.input(path)?;
    }
    let mut graph = loaded.graph;
    let names = input
        .views
        .iter()
        .enumerate()
        .map(|(v, p)| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("view{v}"))
        })
        .collect::<Vec<_>>();
    // keep positional names if stems collide
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    if unique.len() == names.len() {
        graph.set_view_names(names);
    }
    log::info!(
        "{} nodes, {} views, edges per view {:?}",
        graph.num_nodes(),
        graph.num_views(),
        graph.edge_counts()
    );
    Ok(graph)
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::User(format!("cannot write {}: {e}", path.display()))
}

pub fn analyze(input: &GraphInput, run: &RunArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::new("analyze", None, serde_json::json!({}));
    let graph = load_input(input, &mut manifest)?;
    let matrix = ratio_matrix(&graph)?;
    for v in 0..graph.num_views() {
        for w in 0..graph.num_views() {
            match matrix.get(v, w) {
                Some(Ratio::UndefinedDenominator) => log::warn!(
                    "views {} and {}: every edge of {} is also in {}; ratio undefined",
                    matrix.views[v],
                    matrix.views[w],
                    matrix.views[w],
                    matrix.views[v]
                ),
                Some(Ratio::UndefinedNumerator) => {
                    log::warn!("view {} has no edges; ratio undefined", matrix.views[v])
                }
                _ => {}
            }
        }
    }
    let dir = out_dir(&run.out)?;
    let (csv, json) = (dir.join("ratio.csv"), dir.join("ratio.json"));
    matrix.save(&csv, &json)?;
    manifest.output(&csv);
    manifest.output(&json);
    manifest.write(&dir)?;
    Ok(())
}

struct Trained<T> {
    graph: MultiViewGraph,
    corpus: PairCorpus,
    out: mvembed::embed::TrainOutput<T>,
}

fn train_typed<T: Real>(
    graph: MultiViewGraph,
    resolved: &ResolvedTrain,
) -> Result<Trained<T>, CliError> {
    let corpus = PairCorpus::build(&graph, &resolved.walk, resolved.train.threads)?;
    log::info!("corpus pairs per view {:?}", corpus.counts());
    let out = run_train::<T>(&graph, &corpus, &resolved.train)?;
    Ok(Trained { graph, corpus, out })
}

fn save_embeddings<T: Real>(
    emb: &Embeddings<T>,
    dir: &Path,
    binary: bool,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let path = dir.join("embeddings.txt");
    write_embeddings_text(&path, emb)?;
    manifest.output(&path);
    if binary {
        let path = dir.join("embeddings.bin");
        write_embeddings_binary(&path, emb)?;
        manifest.output(&path);
        manifest.output(&dir.join("embeddings.bin.json"));
    }
    Ok(())
}

fn finish_train<T: Real>(
    t: &Trained<T>,
    dir: &Path,
    binary: bool,
    dump_walks: bool,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let emb = t.out.tables.aggregate(t.graph.names());
    save_embeddings(&emb, dir, binary, manifest)?;
    let nodes = dir.join("nodes.tsv");
    t.graph.names().write(&nodes)?;
    manifest.output(&nodes);
    let loss = dir.join("loss.csv");
    t.out.trace.save_csv(&loss)?;
    manifest.output(&loss);
    if dump_walks {
        let walks = dir.join("walks.txt");
        t.corpus.write_walks(&walks)?;
        manifest.output(&walks);
    }
    Ok(())
}

pub fn train(
    input: &GraphInput,
    flags: &TrainFlags,
    run: &RunArgs,
    binary: bool,
    dump_walks: bool,
) -> Result<(), CliError> {
    let file = FileConfig::load(run.config.as_deref())?;
    let resolved = resolve_train(flags, &file, run.seed)?;
    let mut manifest = Manifest::new("train", Some(resolved.train.seed), &resolved);
    if let Some(c) = &run.config {
        manifest.input(c)?;
    }
    let graph = load_input(input, &mut manifest)?;
    let dir = out_dir(&run.out)?;
    match resolved.precision {
        Precision::F32 => finish_train(
            &train_typed::<f32>(graph, &resolved)?,
            &dir,
            binary,
            dump_walks,
            &mut manifest,
        )?,
        Precision::F64 => finish_train(
            &train_typed::<f64>(graph, &resolved)?,
            &dir,
            binary,
            dump_walks,
            &mut manifest,
        )?,
    }
    manifest.write(&dir)?;
    Ok(())
}

fn load_label_set(
    args: &LabelArgs,
    names: &NodeNames,
    folds: usize,
    seed: u64,
    embeddings: Option<&Path>,
) -> Result<LabelSet, CliError> {
    let loaded =
        load_labels(&args.labels, args.task.kind(), names, folds, seed).map_err(|e| match e {
            mvembed::Error::UnknownNode(n) => CliError::User(match embeddings {
                Some(p) => format!("labeled node `{n}` has no embedding in {}", p.display()),
                None => format!("labeled node `{n}` is not in the graph"),
            }),
            other => other.into(),
        })?;
    Ok(loaded.labels)
}

/// 1000 for roughly balanced labels, 0.1 when the smallest class is under a
/// tenth of the largest.
fn default_gamma(labels: &LabelSet) -> f64 {
    let mut counts = vec![0usize; labels.num_classes()];
    for &c in &labels.classes {
        counts[c] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    if (min as f64) < 0.1 * max as f64 {
        0.1
    } else {
        1000.0
    }
}

#[derive(Serialize)]
struct PlusParams<'a> {
    #[serde(flatten)]
    resolved: &'a ResolvedTrain,
    gamma: f64,
    task: Task,
    folds: usize,
}

fn plus_typed<T: Real>(
    graph: &MultiViewGraph,
    labels: &LabelSet,
    resolved: &ResolvedTrain,
    gamma: f64,
    cv: Option<EvalConfig>,
    dir: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let corpus = PairCorpus::build(graph, &resolved.walk, resolved.train.threads)?;
    let out = run_train_plus::<T>(graph, &corpus, labels, &resolved.train, gamma)?;
    let (emb, weights) = out.embeddings(graph.names());
    save_embeddings(&emb, dir, false, manifest)?;
    let nodes = dir.join("nodes.tsv");
    graph.names().write(&nodes)?;
    manifest.output(&nodes);
    let att = dir.join("attention.csv");
    write_attention_csv(&att, graph.names(), graph.view_names(), &weights)?;
    manifest.output(&att);
    let loss = dir.join("loss.csv");
    out.trace.save_csv(&loss)?;
    manifest.output(&loss);
    let sup = dir.join("supervised_loss.csv");
    let mut text = String::from("epoch,loss\n");
    for (e, l) in out.att_trace.iter().enumerate() {
        text.push_str(&format!("{},{l}\n", e + 1));
    }
    std::fs::write(&sup, text).map_err(write_err(&sup))?;
    manifest.output(&sup);

    if let Some(cfg) = cv {
        let report = evaluate_plus::<T>(graph, &corpus, labels, &resolved.train, gamma, &cfg)?;
        save_report(&report, dir, manifest)?;
    }
    Ok(())
}

pub fn train_plus(
    input: &GraphInput,
    flags: &TrainFlags,
    run: &RunArgs,
    label_args: &LabelArgs,
    gamma: Option<f64>,
    cv: bool,
) -> Result<(), CliError> {
    if label_args.task == Task::Link {
        return Err(CliError::User(
            "train-plus supports --task node or pair".into(),
        ));
    }
    let file = FileConfig::load(run.config.as_deref())?;
    let resolved = resolve_train(flags, &file, run.seed)?;
    let folds = label_args.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
    let mut manifest = Manifest::new(
        "train-plus",
        Some(resolved.train.seed),
        serde_json::json!({}),
    );
    if let Some(c) = &run.config {
        manifest.input(c)?;
    }
    let graph = load_input(input, &mut manifest)?;
    manifest.input(&label_args.labels)?;
    let labels = load_label_set(label_args, graph.names(), folds, resolved.train.seed, None)?;
    let gamma = gamma
        .or(file.gamma)
        .unwrap_or_else(|| default_gamma(&labels));
    log::info!("gamma = {gamma}");
    manifest.params = serde_json::to_value(PlusParams {
        resolved: &resolved,
        gamma,
        task: label_args.task,
        folds,
    })
    .expect("serializable");
    let eval_cfg = cv.then(|| eval_config(label_args, &file, resolved.train.threads));
    let dir = out_dir(&run.out)?;
    match resolved.precision {
        Precision::F32 => plus_typed::<f32>(
            &graph,
            &labels,
            &resolved,
            gamma,
            eval_cfg,
            &dir,
            &mut manifest,
        )?,
        Precision::F64 => plus_typed::<f64>(
            &graph,
            &labels,
            &resolved,
            gamma,
            eval_cfg,
            &dir,
            &mut manifest,
        )?,
    }
    manifest.write(&dir)?;
    Ok(())
}

fn eval_config(args: &LabelArgs, file: &FileConfig, threads: usize) -> EvalConfig {
    EvalConfig {
        combiner: args
            .combiner
            .or(file.combiner)
            .map(Into::into)
            .unwrap_or_default(),
        threads,
        ..EvalConfig::default()
    }
}

fn save_report(report: &EvalReport, dir: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let (json, csv) = (dir.join("report.json"), dir.join("report.csv"));
    report.save(&json, &csv)?;
    manifest.output(&json);
    manifest.output(&csv);
    Ok(())
}

pub enum EmbeddingSource {
    File(PathBuf),
    Train(GraphInput, TrainFlags),
}

/// Positive pairs, `src<TAB>dst` per line.
fn read_pairs(
    path: &Path,
    names: &NodeNames,
    embeddings: Option<&Path>,
) -> Result<Vec<(usize, usize)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
    let lookup = |n: &str| {
        names.get(n).ok_or_else(|| {
            CliError::User(match embeddings {
                Some(p) => format!("labeled node `{n}` has no embedding in {}", p.display()),
                None => format!("labeled node `{n}` is not in the graph"),
            })
        })
    };
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() < 2 {
            return Err(CliError::User(format!(
                "{}:{}: expected src<TAB>dst",
                path.display(),
                k + 1
            )));
        }
        pairs.push((lookup(cols[0])?, lookup(cols[1])?));
    }
    if pairs.is_empty() {
        return Err(CliError::User(format!("{}: no pairs", path.display())));
    }
    Ok(pairs)
}

pub fn eval(
    source: EmbeddingSource,
    run: &RunArgs,
    label_args: &LabelArgs,
    neg_ratio: Option<usize>,
) -> Result<(), CliError> {
    let file = FileConfig::load(run.config.as_deref())?;
    let folds = label_args.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
    let mut params = BTreeMap::new();
    let mut manifest = Manifest::new("eval", None, serde_json::json!({}));
    if let Some(c) = &run.config {
        manifest.input(c)?;
    }
    let (emb, emb_path, threads) = match source {
        EmbeddingSource::File(path) => {
            manifest.input(&path)?;
            (read_embeddings_text(&path)?, Some(path), 1)
        }
        EmbeddingSource::Train(input, flags) => {
            let resolved = resolve_train(&flags, &file, run.seed)?;
            let graph = load_input(&input, &mut manifest)?;
            params.insert(
                "training",
                serde_json::to_value(&resolved).expect("serializable"),
            );
            let t = train_typed::<f64>(graph, &resolved)?;
            (
                t.out.tables.aggregate(t.graph.names()),
                None,
                resolved.train.threads,
            )
        }
    };
    let seed = run
        .seed
        .or(file.seed)
        .unwrap_or(mvembed::embed::TrainConfig::default().seed);
    manifest.seed = Some(seed);
    manifest.input(&label_args.labels)?;
    let cfg = eval_config(label_args, &file, threads);
    let labels = if label_args.task == Task::Link {
        let ratio = neg_ratio.or(file.neg_ratio).unwrap_or(DEFAULT_NEG_RATIO);
        params.insert("neg_ratio", ratio.into());
        let positives = read_pairs(&label_args.labels, &emb.names, emb_path.as_deref())?;
        let inst = build_link_instances(&emb, &positives, ratio, cfg.combiner, seed)?;
        link_label_set(&inst, folds, seed)?
    } else {
        load_label_set(label_args, &emb.names, folds, seed, emb_path.as_deref())?
    };
    params.insert(
        "task",
        serde_json::to_value(label_args.task).expect("serializable"),
    );
    params.insert("folds", folds.into());
    let report = evaluate_embeddings(&emb, &labels, &cfg)?;
    manifest.params = serde_json::to_value(params).expect("serializable");
    let dir = out_dir(&run.out)?;
    save_report(&report, &dir, &mut manifest)?;
    manifest.write(&dir)?;
    println!("{}", EvalReport::CSV_HEADER);
    println!("{}", report.csv_row());
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 500)]
    pub num_nodes: usize,
    #[arg(long, default_value_t = 2)]
    pub num_views: usize,
    #[arg(long, default_value_t = 2)]
    pub communities: usize,
    /// Within-community edge probability per view (one value applies to all)
    #[arg(long, value_delimiter = ',', default_value = "0.036")]
    pub p_intra: Vec<f64>,
    /// Between-community edge probability per view (one value applies to all)
    #[arg(long, value_delimiter = ',', default_value = "0.004")]
    pub p_inter: Vec<f64>,
    /// Probability that a view-0 edge is copied into each other view
    #[arg(long, default_value_t = 0.0)]
    pub copy: f64,
    /// Uniform noise edge probability in views other than 0
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Folds for the written label file's sanity check
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

fn per_view(values: &[f64], views: usize, name: &str) -> Result<Vec<f64>, CliError> {
    match values.len() {
        1 => Ok(vec![values[0]; views]),
        n if n == views => Ok(values.to_vec()),
        n => Err(CliError::User(format!(
            "--{name} has {n} values for {views} views"
        ))),
    }
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.run.config.as_deref())?;
    let spec = SynthSpec {
        num_nodes: args.num_nodes,
        num_views: args.num_views,
        num_communities: args.communities,
        membership: Vec::new(),
        p_intra: per_view(&args.p_intra, args.num_views, "p-intra")?,
        p_inter: per_view(&args.p_inter, args.num_views, "p-inter")?,
        cross_copy: args.copy,
        p_noise: args.noise,
        seed: args
            .run
            .seed
            .or(file.seed)
            .unwrap_or(mvembed::embed::TrainConfig::default().seed),
    };
    let mut manifest = Manifest::new("generate", Some(spec.seed), &spec);
    let synth = generate_synthetic(&spec, args.folds)?;
    let dir = out_dir(&args.run.out)?;
    for path in synth.graph.write(&dir, "view")? {
        manifest.output(&path);
    }
    let labels = dir.join("labels.tsv");
    let mut text = String::new();
    for (i, c) in synth.communities.iter().enumerate() {
        text.push_str(&format!("{}\t{c}\n", synth.graph.names().name(i)));
    }
    std::fs::write(&labels, text).map_err(write_err(&labels))?;
    manifest.output(&labels);
    for v in 1..spec.num_views {
        log::info!(
            "expected ratio view 0 -> {v}: {:.3}",
            spec.expected_ratio(v)
        );
    }
    manifest.write(&dir)?;
    Ok(())
}
