use std::path::Path;
use std::process::{Command, Output};

use mlstm::io::predictions::from_json;
use mlstm::io::samples::read_samples;

fn mlstm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlstm"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mlstm(dir, args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 6] = ["--set", "synth.n_vehicles=24", "--set", "synth.duration_s=50", "--seed", "4"];

#[test]
fn synth_is_deterministic_and_feeds_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &[&SMALL[..], &["synth", "--out", "a.csv", "--script", "a.jsonl"]].concat());
    ok(d, &[&SMALL[..], &["synth", "--out", "b.csv"]].concat());
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert!(std::fs::read_to_string(d.join("a.jsonl")).unwrap().lines().count() > 0);

    ok(d, &["label", "--tracks", "a.csv", "--out", "labels.jsonl"]);
    let labels = std::fs::read_to_string(d.join("labels.jsonl")).unwrap();
    assert!(labels.lines().all(|l| l.contains("\"lateral\"")));

    ok(d, &["--set", "data.stride=10", "ingest", "--tracks", "a.csv", "--train-out", "train.samples", "--test-out", "test.jsonl"]);
    let train = read_samples(&d.join("train.samples")).unwrap();
    let test = read_samples(&d.join("test.jsonl")).unwrap();
    assert!(!train.is_empty() && !test.is_empty());

    let csv = ok(d, &["eval", "--samples", "test.jsonl", "--model", "cv"]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("method,rmse_1s,rmse_2s,rmse_3s,rmse_4s,rmse_5s"));
    assert!(lines.next().unwrap().starts_with("CV,"));

    let tiny = [
        "--set", "model.hidden=6", "--set", "model.embed=5", "--set", "train.epochs=2", "--set",
        "train.classifier_epochs=2", "--set", "train.batch_size=16",
    ];
    ok(d, &[&tiny[..], &["train", "--variant", "m-lstm", "--train", "train.samples", "--out", "m.ckpt"]].concat());
    ok(d, &["predict", "--model", "m.ckpt", "--samples", "test.jsonl", "--out", "pred.json", "--grid", "-5,5,-10,60,5", "--grid-out", "grid.csv"]);
    let preds = from_json(&std::fs::read_to_string(d.join("pred.json")).unwrap()).unwrap();
    assert_eq!(preds.len(), test.len());
    for p in &preds {
        assert_eq!(p.modes.len(), 6);
        let total: f64 = p.modes.iter().map(|m| m.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    assert!(std::fs::read_to_string(d.join("grid.csv")).unwrap().lines().count() > 1);
    ok(d, &["eval", "--samples", "test.jsonl", "--model", "cv", "--model", "m.ckpt", "--out", "rmse.csv", "--accuracy-out", "acc.csv"]);
    let rmse = std::fs::read_to_string(d.join("rmse.csv")).unwrap();
    assert!(rmse.lines().any(|l| l.starts_with("M-LSTM,")));
}

#[test]
fn gradcheck_passes_on_defaults_scaled_down() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["--set", "model.hidden=8", "--set", "model.embed=6", "gradcheck"]);
    assert!(!out.is_empty());
}

#[test]
fn exit_codes_separate_usage_data_and_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(mlstm(d, &["--set", "model.nonsense=1", "synth", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(mlstm(d, &["--set", "train.lr=-1", "synth", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(mlstm(d, &["no-such-command"]).status.code(), Some(1));

    std::fs::write(d.join("bad.csv"), "Vehicle_ID,Frame_ID,Local_X,Local_Y,Lane_ID\n1,1,zero,0,1\n").unwrap();
    assert_eq!(mlstm(d, &["label", "--tracks", "bad.csv", "--out", "l.jsonl"]).status.code(), Some(2));
    assert_eq!(mlstm(d, &["eval", "--samples", "missing.samples", "--model", "cv"]).status.code(), Some(2));
    std::fs::write(d.join("junk.ckpt"), b"not a checkpoint").unwrap();
    std::fs::write(d.join("empty.samples"), mlstm::io::samples::encode_binary(&[])).unwrap();
    assert_eq!(
        mlstm(d, &["eval", "--samples", "empty.samples", "--model", "junk.ckpt"]).status.code(),
        Some(2)
    );

    let strict = mlstm(d, &["--set", "model.hidden=4", "--set", "model.embed=3", "gradcheck", "--tolerance", "0"]);
    assert_eq!(strict.status.code(), Some(3));
}
