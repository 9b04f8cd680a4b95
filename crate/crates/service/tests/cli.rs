use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dupwatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dupwatch"))
        .args(args)
        .env("DW_LOG", "warn")
        .output()
        .unwrap()
}

/// Runs a command that must succeed and returns its JSON line.
fn json(args: &[&str]) -> Value {
    let out = dupwatch(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    serde_json::from_str(stdout.lines().next().unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn offline_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("ai.jsonl");
    let gold = dir.path().join("gold.json");
    let model = dir.path().join("model");

    let synth = json(&[
        "synth",
        "--out",
        s(&corpus),
        "--gold",
        s(&gold),
        "--class-id",
        "ai",
        "--originals",
        "40",
        "--duplicates",
        "8",
    ]);
    assert_eq!(synth["n_posts"], 48);

    let trained = json(&["train", "--corpus", s(&corpus), "--out", s(&model)]);
    assert_eq!(trained["class_id"], "ai");
    assert_eq!(trained["n_posts"], 48);
    assert!(model.join("ensemble.json").exists());

    // a post's own question text must come back first
    let first = std::fs::read_to_string(&corpus).unwrap();
    let post: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let recs = json(&[
        "recommend",
        "--model",
        s(&model),
        "--title",
        post["title"].as_str().unwrap(),
        "--body",
        post["body"].as_str().unwrap(),
        "-k",
        "3",
    ]);
    let recs = recs["recommendations"].as_array().unwrap();
    assert!(recs.len() <= 3);
    assert_eq!(recs[0]["post_id"], post["id"]);

    let feed = json(&[
        "feed",
        "student",
        "--corpus",
        s(&corpus),
        "--now",
        "2019-02-01T00:00:00Z",
    ]);
    assert!(feed["items"].as_array().unwrap().len() <= 6);
    let feed = json(&[
        "feed",
        "instructor",
        "--corpus",
        s(&corpus),
        "--now",
        "2019-02-01T00:00:00",
    ]);
    assert!(feed["items"].as_array().unwrap().len() <= 6);

    let report = json(&[
        "eval",
        "walk-forward",
        "--corpus",
        s(&corpus),
        "--gold",
        s(&gold),
    ]);
    assert_eq!(report["eligible"], 8);
    assert_eq!(report["k"], 5);
    assert!(report["recall_at_k"].as_f64().unwrap() >= 0.0);

    let rate = json(&[
        "eval",
        "dup-rate",
        "--corpus",
        s(&corpus),
        "--gold",
        s(&gold),
    ]);
    assert_eq!(rate["duplicates"], 8);
}

#[test]
fn ztest_prints_json_then_table() {
    let out = dupwatch(&[
        "eval", "ztest", "--x1", "50", "--n1", "195", "--x2", "30", "--n2", "168",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let v: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!((v["p_one_sided"].as_f64().unwrap() - 0.0372157).abs() < 1e-4);
    assert!(lines.next().unwrap().contains("one-sided p = 0.0372"));

    let out = dupwatch(&[
        "--format", "table", "eval", "ztest", "--x1", "1", "--n1", "2", "--x2", "1", "--n2", "2",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("z = 0.0000"));
}

#[test]
fn errors_exit_non_zero() {
    let out = dupwatch(&[
        "train",
        "--corpus",
        "/nonexistent/c.jsonl",
        "--out",
        "/tmp/x",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));

    let out = dupwatch(&[
        "eval", "ztest", "--x1", "0", "--n1", "5", "--x2", "0", "--n2", "5",
    ]);
    assert!(!out.status.success());

    let out = dupwatch(&["feed", "student", "--corpus", "c", "--now", "tuesday"]);
    assert!(!out.status.success());

    let out = dupwatch(&["serve"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus_paths"));
}
