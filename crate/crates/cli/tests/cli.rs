use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(rel)
}

fn claimtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimtree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synthetic_args(out: &Path) -> Vec<String> {
    vec![
        "--corpus".into(),
        fixture("synthetic/corpus.jsonl").display().to_string(),
        "--parses".into(),
        fixture("synthetic/parses.jsonl").display().to_string(),
        "--qrels".into(),
        fixture("synthetic/qrels.tsv").display().to_string(),
        "--output-dir".into(),
        out.display().to_string(),
    ]
}

fn run_with(sub: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec![sub.into()];
    args.extend(synthetic_args(out));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    claimtree(&refs)
}

#[test]
fn validate_ok_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = run_with("validate", out.path(), &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["documents"], 58);
}

#[test]
fn corrupt_corpus_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    fs::write(
        &corpus,
        "{\"doc_id\": \"A\", \"language\": \"en\", \"claims\": []}\nnot json\n",
    )
    .unwrap();
    let o = claimtree(&["validate", "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("corpus.jsonl:2:"), "{err}");
}

#[test]
fn bad_arguments_exit_two() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        run_with("run", out.path(), &["--top-n", "35"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_with("run", out.path(), &["--method", "mlt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(claimtree(&["run", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(claimtree(&["run"]).status.code(), Some(2));
}

#[test]
fn run_writes_tagged_outputs() {
    let out = tempfile::tempdir().unwrap();
    let o = run_with(
        "run",
        out.path(),
        &[
            "--method",
            "clst06",
            "--boost",
            "--no-retag",
            "--n-max",
            "10",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.path().join("run-clst06-noretag-boost.txt").exists());
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.path().join("report-clst06-noretag-boost.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["metadata"]["boost"], true);
    assert_eq!(report["metadata"]["retag"], false);
    assert_eq!(report["topics"].as_array().unwrap().len(), 10);
}

#[test]
fn flags_override_config_file() {
    let out = tempfile::tempdir().unwrap();
    let config = out.path().join("config.json");
    fs::write(
        &config,
        r#"{"method": "baseline", "top_n": 40, "n_max": 10}"#,
    )
    .unwrap();
    let o = run_with(
        "extract",
        out.path(),
        &["--config", config.to_str().unwrap(), "--top-n", "20"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let dump = fs::read_to_string(out.path().join("queries-baseline.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(dump.lines().next().unwrap()).unwrap();
    assert_eq!(first["terms"].as_array().unwrap().len(), 20);
}

#[test]
fn bad_config_file_exits_two() {
    let out = tempfile::tempdir().unwrap();
    let config = out.path().join("config.json");
    fs::write(&config, r#"{"methd": "baseline"}"#).unwrap();
    let o = run_with("run", out.path(), &["--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(
            run_with("run", dir.path(), &["--n-max", "10", "--seed", "4"])
                .status
                .success()
        );
    }
    for name in [
        "run-clst05.txt",
        "report-clst05.json",
        "queries-clst05.jsonl",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn index_grid_and_report_subcommands() {
    let out = tempfile::tempdir().unwrap();
    let o = run_with("index", out.path(), &[]);
    assert!(o.status.success());
    let snapshot = out.path().join("index.json");
    assert!(snapshot.exists());

    let o = run_with(
        "grid",
        out.path(),
        &[
            "--alpha-grid",
            "0,1",
            "--beta-grid",
            "0.5",
            "--n-max",
            "10",
            "--top-n",
            "30",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let best: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(best["best_beta"], 0.5);

    let idx = snapshot.to_str().unwrap().to_string();
    assert!(run_with(
        "run",
        out.path(),
        &["--index", &idx, "--n-max", "10", "--top-n", "30"]
    )
    .status
    .success());
    assert!(run_with(
        "run",
        out.path(),
        &["--method", "baseline", "--n-max", "10"]
    )
    .status
    .success());
    let run = out.path().join("run-clst05.txt");
    let base = out.path().join("run-baseline.txt");
    let o = run_with(
        "report",
        out.path(),
        &[
            "--run",
            run.to_str().unwrap(),
            "--compare",
            base.to_str().unwrap(),
            "--n-max",
            "10",
            "--iterations",
            "5000",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["comparison"]["p_recall"].as_f64().unwrap() < 0.05);
}
