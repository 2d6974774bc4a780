use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_roletransfer");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Strips provenance comment lines.
fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn synth(dir: &Path, name: &str, n: usize, exponent: f64, seed: u64) -> (PathBuf, PathBuf) {
    let edges = dir.join(format!("{name}.txt"));
    let labels = dir.join(format!("{name}.tsv"));
    ok(&[
        "synth",
        "--n",
        &n.to_string(),
        "--exponent",
        &exponent.to_string(),
        "--seed",
        &seed.to_string(),
        "--edges",
        s(&edges),
        "--labels",
        s(&labels),
    ]);
    (edges, labels)
}

#[test]
fn extract_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tri.txt");
    fs::write(&g, "1 2\n2 3\n3 1\n").unwrap();
    let out = dir.path().join("f.tsv");
    ok(&["extract", "--graph", s(&g), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# roletransfer "));
    assert!(lines[0].contains(" config=") && lines[0].contains(" seed="));
    assert_eq!(lines[1], "id\tdegree\tindegree\toutdegree\tclustering\tpagerank");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("1\t"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.tsv");
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&["extract", "--graph", s(&missing), "--out", s(&out)]), 2);

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "% nothing here\n").unwrap();
    let e = run(&["extract", "--graph", s(&empty), "--out", s(&out)]);
    assert_eq!(e.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&e.stderr).contains("no nodes"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n3\n").unwrap();
    assert_eq!(code(&["extract", "--graph", s(&bad), "--out", s(&out)]), 3);

    assert_eq!(
        code(&[
            "transform", "--features", "f", "--graph", "g", "--out", "o", "--plan", "degre"
        ]),
        64
    );
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&[]), 64);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["extract", "--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn bad_run_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "plan = sideways\n").unwrap();
    assert_eq!(code(&["pipeline", "--config", s(&cfg)]), 64);
    fs::write(
        &cfg,
        "source_edges = nope.txt\nsource_labels = nope.tsv\ntarget_edges = nope.txt\n\
         output_dir = out\nrole = admin\n",
    )
    .unwrap();
    assert_eq!(code(&["pipeline", "--config", s(&cfg)]), 2);
}

#[test]
fn schema_mismatch_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (edges, labels) = synth(d, "net", 600, 2.5, 3);
    let base = d.join("base.tsv");
    let tr = d.join("tr.tsv");
    let model = d.join("m.bin");
    let pred = d.join("p.tsv");
    ok(&["extract", "--graph", s(&edges), "--out", s(&base)]);
    ok(&[
        "transform", "--features", s(&base), "--graph", s(&edges), "--plan", "all",
        "--min-tail", "20", "--out", s(&tr),
    ]);
    ok(&[
        "train", "--features", s(&base), "--labels", s(&labels), "--role", "admin",
        "--n-trees", "8", "--model", s(&model),
    ]);
    assert_eq!(
        code(&["predict", "--features", s(&tr), "--model", s(&model), "--out", s(&pred)]),
        3
    );
    ok(&["predict", "--features", s(&base), "--model", s(&model), "--out", s(&pred)]);
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let cfg = dir.join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# transfer run\n\
             source_edges = src.txt\n\
             source_labels = src.tsv\n\
             target_edges = tgt.txt\n\
             target_labels = tgt.tsv\n\
             output_dir = out\n\
             role = admin\n\
             plan = all\n\
             rounds = 3\n\
             min_tail = 20\n\
             n_trees = 16\n\
             seed = 5\n\
             top_k = 10,50\n\
             {extra}"
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn pipeline_equals_chained_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (src, src_labels) = synth(d, "src", 800, 2.4, 1);
    let (tgt, tgt_labels) = synth(d, "tgt", 1200, 2.8, 2);
    let cfg = write_config(d, "");
    ok(&["pipeline", "--config", s(&cfg)]);
    let out = d.join("out");

    let chain = d.join("chain");
    fs::create_dir(&chain).unwrap();
    let c = |name: &str| chain.join(name);
    for (net, edges) in [("source", &src), ("target", &tgt)] {
        let base = c(&format!("{net}_base.tsv"));
        let tr = c(&format!("{net}_tr.tsv"));
        ok(&["extract", "--graph", s(edges), "--out", s(&base)]);
        ok(&[
            "transform", "--features", s(&base), "--graph", s(edges), "--plan", "all",
            "--min-tail", "20", "--out", s(&tr), "--fits", s(&c(&format!("{net}_fits.jsonl"))),
        ]);
        ok(&[
            "aggregate", "--features", s(&tr), "--graph", s(edges), "--rounds", "3",
            "--out", s(&c(&format!("{net}_features.tsv"))),
        ]);
    }
    ok(&[
        "train", "--features", s(&c("source_features.tsv")), "--labels", s(&src_labels),
        "--role", "admin", "--n-trees", "16", "--seed", "5", "--model", s(&c("model.bin")),
    ]);
    ok(&[
        "predict", "--features", s(&c("target_features.tsv")), "--model", s(&c("model.bin")),
        "--out", s(&c("predictions.tsv")),
    ]);
    ok(&[
        "evaluate", "--predictions", s(&c("predictions.tsv")), "--labels", s(&tgt_labels),
        "--role", "admin", "--source", "src", "--target", "tgt", "--plan", "all",
        "--top-k", "10,50", "--top-k-out", s(&c("topk.tsv")), "--out", s(&c("report.tsv")),
    ]);

    for f in [
        "source_features.tsv",
        "target_features.tsv",
        "predictions.tsv",
        "report.tsv",
        "topk.tsv",
    ] {
        assert_eq!(body(&out.join(f)), body(&c(f)), "{f} differs");
    }
    for (a, b) in [("source_fits.jsonl", "source_fits.jsonl"), ("target_fits.jsonl", "target_fits.jsonl")] {
        let skip_head = |p: &Path| fs::read_to_string(p).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(skip_head(&out.join(a)), skip_head(&c(b)), "{a} differs");
    }

    let report = roletransfer::io::parse_reports(&fs::read_to_string(out.join("report.tsv")).unwrap())
        .unwrap();
    assert_eq!(report.len(), 1);
    assert!(report[0].auc().is_some());

    // Every artifact carries the same provenance.
    let first = |p: &Path| fs::read_to_string(p).unwrap().lines().next().unwrap().to_string();
    let head = first(&out.join("report.tsv"));
    assert!(head.contains("seed=5"));
    for f in ["source_features.tsv", "target_features.tsv", "predictions.tsv", "topk.tsv"] {
        assert_eq!(first(&out.join(f)), head);
    }
    let fits_head: serde_json::Value =
        serde_json::from_str(&first(&out.join("source_fits.jsonl"))).unwrap();
    assert_eq!(fits_head["seed"], 5);
    let model = roletransfer::forest::load_model(out.join("model.bin")).unwrap();
    assert_eq!(format!("# {}", model.provenance), head);
}

#[test]
fn evaluate_ablation_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (a, al) = synth(d, "a", 700, 2.4, 1);
    let (b, bl) = synth(d, "b", 700, 2.8, 2);
    let report = d.join("report.tsv");
    let summary = d.join("summary.tsv");
    ok(&[
        "evaluate",
        "--role", "admin",
        "--network", &format!("a={},{}", s(&a), s(&al)),
        "--network", &format!("b={},{}", s(&b), s(&bl)),
        "--plans", "none,all",
        "--min-tail", "20",
        "--n-trees", "8",
        "--out", s(&report),
        "--summary", s(&summary),
    ]);
    let reports =
        roletransfer::io::parse_reports(&fs::read_to_string(&report).unwrap()).unwrap();
    // 2 plans x 2 ordered pairs + 2 within-network baselines.
    assert_eq!(reports.len(), 6);
    let text = body(&summary);
    assert!(text.starts_with("plan\tcount\tfailed\tmin\tmedian\tmean\tmax\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn pipeline_reports_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "src", 800, 2.4, 1);
    synth(d, "tgt", 1200, 2.8, 2);
    let cfg = write_config(d, "");
    ok(&["--threads", "1", "pipeline", "--config", s(&cfg), "--out-dir", s(&d.join("one"))]);
    ok(&["pipeline", "--threads", "4", "--config", s(&cfg), "--out-dir", s(&d.join("four"))]);
    for f in ["report.tsv", "predictions.tsv", "topk.tsv", "model.bin", "source_features.tsv"] {
        assert_eq!(
            fs::read(d.join("one").join(f)).unwrap(),
            fs::read(d.join("four").join(f)).unwrap(),
            "{f} differs"
        );
    }
}
