//! End-to-end runs of the `quadcode` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadcode"))
        .args(args)
        .env_remove("QUADCODE_THREADS")
        .output()
        .expect("spawn quadcode")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest_of(p: &Path) -> serde_json::Value {
    let mut m = p.as_os_str().to_owned();
    m.push(".manifest.json");
    serde_json::from_str(&std::fs::read_to_string(PathBuf::from(m)).unwrap()).unwrap()
}

#[test]
fn softlabel_matches_frozen_histogram() {
    // Frozen by tests/oracles/softlabel_histogram.py, an independent scan.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("labelled.jsonl");
    let o = run(&[
        "softlabel",
        "--dict",
        s(&fixture("dictionary.txt")),
        "--in",
        s(&fixture("corpus.jsonl")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let counts: Vec<(String, usize)> = stdout
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    let want = [
        ("verbal_cooperation", 12),
        ("material_cooperation", 6),
        ("verbal_conflict", 9),
        ("material_conflict", 15),
        ("no_label", 8),
    ];
    assert_eq!(counts, want.map(|(k, v)| (k.to_string(), v)));

    // Only labelled sentences are written.
    let input = quadcode::corpus::read_jsonl(&fixture("corpus.jsonl")).unwrap();
    let records = quadcode::corpus::read_jsonl(&out).unwrap();
    assert_eq!(records.len(), 42);
    assert!(records.iter().all(|r| r.label.is_some() && r.cameo.is_some()));
    let unlabelled: Vec<&str> = input
        .iter()
        .filter(|r| !records.iter().any(|o| o.id == r.id))
        .map(|r| r.id.as_str())
        .collect();
    assert_eq!(unlabelled, ["s12", "s29", "s35", "s37", "s40", "s44", "s46", "s50"]);

    let m = manifest_of(&out);
    assert_eq!(m["command"], "softlabel");
    let inputs = m["inputs"].as_object().unwrap();
    assert_eq!(inputs.len(), 2);
    assert!(inputs.values().all(|d| d.as_str().unwrap().len() == 64));
}

#[test]
fn missing_dictionary_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no-such-dictionary.txt");
    let o = run(&[
        "softlabel",
        "--dict",
        s(&missing),
        "--in",
        s(&fixture("corpus.jsonl")),
        "--out",
        s(&dir.path().join("x.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-dictionary.txt"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(run(&["train", "--model", "rnn"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn empty_corpus_codes_to_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    std::fs::write(&input, "").unwrap();
    let out = dir.path().join("out.jsonl");
    let o = run(&["softlabel", "--dict", s(&fixture("dictionary.txt")), "--in", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn fixture_train_eval_predict_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = d.join("fx");
    let o = run(&["fixture", "--outdir", s(&fx), "--train-per-class", "30", "--dev-per-class", "8", "--test-per-class", "8"]);
    assert!(o.status.success());
    assert!(fx.join("manifest.json").exists());

    // Label transfer from the English side onto the aligned Arabic side.
    let transferred = d.join("ar_labelled.jsonl");
    let o = run(&[
        "transfer",
        "--src",
        s(&fx.join("aligned_en.jsonl")),
        "--tgt",
        s(&fx.join("aligned_ar.jsonl")),
        "--align",
        s(&fx.join("alignment.jsonl")),
        "--out",
        s(&transferred),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!quadcode::corpus::read_jsonl(&transferred).unwrap().is_empty());

    let splits = d.join("splits");
    let o = run(&["split", "--in", s(&fx.join("en_train.jsonl")), "--seed", "3", "--outdir", s(&splits)]);
    assert!(o.status.success());
    let sizes: Vec<usize> = ["train", "dev", "test"]
        .iter()
        .map(|n| quadcode::corpus::read_jsonl(&splits.join(format!("{n}.jsonl"))).unwrap().len())
        .collect();
    assert_eq!(sizes.iter().sum::<usize>(), 120);

    let ck = d.join("word.qcnn");
    let o = run(&[
        "train",
        "--model",
        "word",
        "--train",
        s(&fx.join("en_train.jsonl")),
        "--dev",
        s(&fx.join("en_dev.jsonl")),
        "--out-checkpoint",
        s(&ck),
        "--fixture-scale",
        "--epochs",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest_of(&ck);
    assert_eq!(m["command"], "train");
    assert_eq!(m["seed"], 0);

    let report = d.join("eval.txt");
    let o = run(&["eval", "--checkpoint", s(&ck), "--test", s(&fx.join("en_test.jsonl")), "--report", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&report).unwrap().contains("accuracy"));

    let preds = d.join("preds.jsonl");
    let o = run(&["predict", "--checkpoint", s(&ck), "--in", s(&fx.join("en_test.jsonl")), "--out", s(&preds)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 32);
    for v in &lines {
        let probs: Vec<f64> = v["probs"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
        assert_eq!(probs.len(), 4);
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "{sum}");
        let predicted: quadcode::QuadClass = serde_json::from_value(v["predicted"].clone()).unwrap();
        let argmax = (0..4).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap();
        assert_eq!(predicted.index(), argmax);
    }

    let garbage = d.join("garbage.qcnn");
    std::fs::write(&garbage, b"not a checkpoint").unwrap();
    let o = run(&["predict", "--checkpoint", s(&garbage), "--in", s(&fx.join("en_test.jsonl")), "--out", s(&preds)]);
    assert_eq!(o.status.code(), Some(2));
}
