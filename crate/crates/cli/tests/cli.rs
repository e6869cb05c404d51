use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_mvembed");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("MVEMBED_LOG", "warn")
        .output()
        .expect("spawn mvembed")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small two-view graph with labels, written by `generate`.
fn fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let g = dir.join("g");
    let o = run(&[
        "generate",
        "--num-nodes",
        "60",
        "--p-intra",
        "0.2",
        "--p-inter",
        "0.02",
        "--copy",
        "0.3",
        "--seed",
        "7",
        "--out",
        s(&g),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    (
        g.join("view.0.tsv"),
        g.join("view.1.tsv"),
        g.join("labels.tsv"),
    )
}

fn views(a: &Path, b: &Path) -> String {
    format!("{},{}", s(a), s(b))
}

const SMALL: &[&str] = &[
    "--dim",
    "8",
    "--epochs",
    "2",
    "--negatives",
    "3",
    "--threads",
    "1",
];

fn train(views: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--views", views, "--out", s(out)];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    run(&args)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn analyze_writes_ratios_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    let out = tmp.path().join("a");
    let o = run(&["analyze", "--views", &views(&v0, &v1), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("ratio.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ratio.json")).unwrap()).unwrap();
    for key in ["min", "max", "median"] {
        assert!(json[key].as_f64().unwrap() > 0.0, "{key}");
    }
    let m = manifest(&out);
    assert_eq!(m["command"], "analyze");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_needs_two_views() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, _, _) = fixture(tmp.path());
    let o = run(&[
        "analyze",
        "--views",
        s(&v0),
        "--out",
        s(&tmp.path().join("a")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("need >= 2 views"), "{}", stderr(&o));
}

#[test]
fn identical_views_warn_and_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, _, _) = fixture(tmp.path());
    let copy = tmp.path().join("copy.tsv");
    std::fs::copy(&v0, &copy).unwrap();
    let out = tmp.path().join("a");
    let o = run(&["analyze", "--views", &views(&v0, &copy), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("WARN"), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("ratio.csv")).unwrap();
    assert!(csv.contains("undefined"), "{csv}");
}

#[test]
fn missing_edge_file_is_a_user_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, _, _) = fixture(tmp.path());
    let missing = tmp.path().join("absent.tsv");
    let o = train(&views(&v0, &missing), &tmp.path().join("t"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.tsv"), "{}", stderr(&o));
}

#[test]
fn bad_flag_values_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    let o = train(&views(&v0, &v1), &tmp.path().join("t"), &["--window", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = train(
        &views(&v0, &v1),
        &tmp.path().join("t"),
        &["--ablation", "no-c2", "--alpha", "0.5"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn train_outputs_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = train(
            &views(&v0, &v1),
            out,
            &["--binary", "--dump-walks", "--seed", "11"],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let emb = std::fs::read(a.join("embeddings.txt")).unwrap();
    assert_eq!(emb, std::fs::read(b.join("embeddings.txt")).unwrap());
    let text = String::from_utf8(emb).unwrap();
    assert_eq!(text.lines().next().unwrap(), "60 8");
    assert_eq!(text.lines().nth(1).unwrap().split(' ').count(), 9);

    assert_eq!(
        std::fs::metadata(a.join("embeddings.bin")).unwrap().len(),
        60 * 8 * 4
    );
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("embeddings.bin.json")).unwrap())
            .unwrap();
    assert_eq!(side["dim"], 8);

    let loss = std::fs::read_to_string(a.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().next().unwrap(), "epoch,total,div,c1,c2");
    assert_eq!(loss.lines().count(), 3);

    let nodes = std::fs::read_to_string(a.join("nodes.tsv")).unwrap();
    assert_eq!(nodes.lines().count(), 60);
    assert!(nodes.lines().all(|l| l.split('\t').count() == 2));

    // at most 60 nodes x 5 walks x 2 views; isolated nodes start no walks
    let walks = std::fs::read_to_string(a.join("walks.txt")).unwrap();
    let body: Vec<&str> = walks.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(body.len() > 500 && body.len() <= 600, "{}", body.len());
    assert!(body.iter().all(|l| l.split(' ').count() <= 10));

    let m = manifest(&a);
    assert_eq!(m["seed"], 11);
    assert_eq!(m["params"]["train"]["dim"], 8);
    assert_eq!(m["params"]["walk"]["window"], 3);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "dim = 4\nwindow = 2\nlr = 0.05\n").unwrap();
    let out = tmp.path().join("t");
    let o = train(
        &views(&v0, &v1),
        &out,
        &["--config", s(&cfg), "--lr", "0.02"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    // SMALL passes --dim 8, so the flag wins over the file
    assert_eq!(m["params"]["train"]["dim"], 8);
    assert_eq!(m["params"]["walk"]["window"], 2);
    assert_eq!(m["params"]["train"]["adam"]["lr"], 0.02);
    assert_eq!(m["params"]["train"]["negatives"], 3);
    assert_eq!(m["params"]["walk"]["walk_length"], 10);
    assert_eq!(m["inputs"][0]["path"], s(&cfg));

    std::fs::write(&cfg, "dimension = 4\n").unwrap();
    let o = train(&views(&v0, &v1), &out, &["--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ablation_presets_resolve() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    for (preset, alpha, beta) in [("no-c2", 1.0, 0.0), ("no-c1c2", 0.0, 0.0)] {
        let out = tmp.path().join(preset);
        let o = train(&views(&v0, &v1), &out, &["--ablation", preset]);
        assert!(o.status.success(), "{}", stderr(&o));
        let m = manifest(&out);
        assert_eq!(m["params"]["train"]["alpha"], alpha);
        assert_eq!(m["params"]["train"]["beta"], beta);
        let loss = std::fs::read_to_string(out.join("loss.csv")).unwrap();
        let row: Vec<f64> = loss
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        if beta == 0.0 && alpha == 0.0 {
            assert!((row[1] - row[2]).abs() <= 1e-9 * row[1], "{row:?}");
        }
    }
}

#[test]
fn eval_reports_and_rejects_unknown_nodes() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, labels) = fixture(tmp.path());
    let t = tmp.path().join("t");
    assert!(train(&views(&v0, &v1), &t, &[]).status.success());
    let emb = t.join("embeddings.txt");

    let e = tmp.path().join("e");
    let o = run(&[
        "eval",
        "--embeddings",
        s(&emb),
        "--labels",
        s(&labels),
        "--out",
        s(&e),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(e.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["num_folds"], 5);
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);
    let csv = std::fs::read_to_string(e.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("task,items,classes,folds,roc_auc,pr_auc,micro_f,macro_f\n"));

    let bad = tmp.path().join("bad.tsv");
    let mut text = std::fs::read_to_string(&labels).unwrap();
    text.push_str("stranger\t1\n");
    std::fs::write(&bad, text).unwrap();
    let o = run(&[
        "eval",
        "--embeddings",
        s(&emb),
        "--labels",
        s(&bad),
        "--out",
        s(&e),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stranger"), "{}", stderr(&o));
}

#[test]
fn eval_link_task() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, _) = fixture(tmp.path());
    let t = tmp.path().join("t");
    assert!(train(&views(&v0, &v1), &t, &[]).status.success());
    let pos = tmp.path().join("pos.tsv");
    let lines: Vec<String> = std::fs::read_to_string(&v0)
        .unwrap()
        .lines()
        .take(30)
        .map(String::from)
        .collect();
    std::fs::write(&pos, lines.join("\n")).unwrap();
    let e = tmp.path().join("e");
    let o = run(&[
        "eval",
        "--embeddings",
        s(&t.join("embeddings.txt")),
        "--labels",
        s(&pos),
        "--task",
        "link",
        "--neg-ratio",
        "2",
        "--out",
        s(&e),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(e.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["num_items"], 90);
}

#[test]
fn train_plus_writes_attention() {
    let tmp = tempfile::tempdir().unwrap();
    let (v0, v1, labels) = fixture(tmp.path());
    let out = tmp.path().join("p");
    let vs = views(&v0, &v1);
    let mut args = vec![
        "train-plus",
        "--views",
        &vs,
        "--labels",
        s(&labels),
        "--out",
        s(&out),
        "--precision",
        "f64",
    ];
    args.extend_from_slice(SMALL);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let att = std::fs::read_to_string(out.join("attention.csv")).unwrap();
    let mut lines = att.lines();
    assert_eq!(lines.next().unwrap(), "node,view,weight");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 120);
    for pair in rows.chunks(2) {
        let sum: f64 = pair.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
    let m = manifest(&out);
    assert_eq!(m["params"]["gamma"], 1000.0);
}
