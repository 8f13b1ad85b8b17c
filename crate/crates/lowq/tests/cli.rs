use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lowq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowq")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TINY: &[&str] = &[
    "--qubits",
    "2",
    "--classes",
    "2",
    "--per-class",
    "16",
    "--length",
    "256",
    "--steps",
    "3",
];

fn train(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--out", out.to_str().unwrap()];
    args.extend_from_slice(TINY);
    args.extend_from_slice(extra);
    lowq(&args)
}

#[test]
fn simcheck_exit_codes() {
    let ok = lowq(&["simcheck"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("PASS dense_equivalence"));

    let cap = lowq(&["simcheck", "--qubits", "12"]);
    assert_eq!(code(&cap), 0);

    let faulty = lowq(&["simcheck", "--inject-fault", "unitarity"]);
    assert_eq!(code(&faulty), 1);
    assert!(stdout(&faulty).contains("FAIL unitarity"));
    assert!(stdout(&faulty).contains("gate = "));
    assert!(stderr(&faulty).contains("unitarity"));

    assert_eq!(code(&lowq(&["simcheck", "--qubits", "13"])), 2);
}

#[test]
fn gradcheck_exit_codes() {
    let ok = lowq(&["gradcheck", "--qubits", "2", "--seed", "7"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let text = stdout(&ok);
    for name in ["vqc", "lowqubit_vqc", "qconv1d", "qgru", "qattention"] {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().nth(1) == Some(name))
            .unwrap();
        assert!(line.starts_with("PASS"), "{line}");
    }
    assert!(text.contains("unclipped, inputs x100"));
    assert_eq!(code(&lowq(&["gradcheck", "--qubits", "11"])), 2);
    assert_eq!(code(&lowq(&["gradcheck", "--qubits", "1"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&lowq(&[])), 2);
    assert_eq!(code(&lowq(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    assert_eq!(code(&train(&out, &["--qubits", "3"])), 2);
    assert_eq!(code(&train(&out, &["--vqc", "plain", "--qubits", "4"])), 2);
    assert_eq!(code(&train(&out, &["--batch-size", "0"])), 2);
    assert_eq!(code(&train(&out, &["--model", "m6"])), 2);
    assert_eq!(code(&lowq(&["bench", "--pairs", "speed"])), 2);
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let out = dir.path().join("r");
    let r = train(&out, &["--wav-dir", missing.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("nowhere"));
}

#[test]
fn train_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = train(&out, &[]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let config = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(config.starts_with("command = train\n"));
    assert!(config.contains("qubits = 2\n"));
    assert!(config.contains("steps = 3\n"));
    let csv = fs::read_to_string(out.join("loss.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,epoch,loss,wall_ms,accuracy");
    assert_eq!(lines.len(), 4);
    assert!(!csv.contains('\r'));
    assert!(
        lines[1].ends_with(','),
        "no accuracy before an evaluation: {}",
        lines[1]
    );
    let last: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(last[0], "3");
    assert!(!last[3].is_empty() && !last[4].is_empty());
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    for key in [
        "final_loss = ",
        "stability = ",
        "median_step_ms = ",
        "final_accuracy = ",
    ] {
        assert!(summary.contains(key), "{summary}");
    }
    assert!(out.join("model.qspc").is_file());
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(code(&train(&a, &["--reproducible"])), 0);
    assert_eq!(code(&train(&b, &["--reproducible"])), 0);
    assert_eq!(code(&train(&c, &["--reproducible", "--threads", "3"])), 0);
    let read = |p: &Path| fs::read(p.join("loss.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
    assert_eq!(
        fs::read(a.join("model.qspc")).unwrap(),
        fs::read(c.join("model.qspc")).unwrap()
    );
}

#[test]
fn synth_output_feeds_training() {
    let dir = tempfile::tempdir().unwrap();
    let wavs = dir.path().join("wavs");
    let cache = dir.path().join("data.qspd");
    let s = lowq(&[
        "synth",
        "--out",
        wavs.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
        "--classes",
        "2",
        "--per-class",
        "3",
        "--length",
        "256",
    ]);
    assert_eq!(code(&s), 0, "{}", stderr(&s));
    assert!(wavs.join("class_01").is_dir());
    let from_wav = train(&dir.path().join("w"), &["--wav-dir", wavs.to_str().unwrap()]);
    assert_eq!(code(&from_wav), 0, "{}", stderr(&from_wav));
    let from_cache = train(&dir.path().join("c"), &["--cache", cache.to_str().unwrap()]);
    assert_eq!(code(&from_cache), 0, "{}", stderr(&from_cache));
}

#[test]
fn transformer_and_classical_models_train() {
    let dir = tempfile::tempdir().unwrap();
    let t = lowq(&[
        "train",
        "--model",
        "qtransformer_mini",
        "--qubits",
        "2",
        "--classes",
        "2",
        "--per-class",
        "4",
        "--length",
        "64",
        "--seq-len",
        "16",
        "--steps",
        "2",
        "--out",
        dir.path().join("t").to_str().unwrap(),
    ]);
    assert_eq!(code(&t), 0, "{}", stderr(&t));
    let m = train(&dir.path().join("m"), &["--model", "m5_mini"]);
    assert_eq!(code(&m), 0, "{}", stderr(&m));
}

#[test]
fn bench_writes_comparison_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let mut args = vec!["bench", "--out", out.to_str().unwrap(), "--pairs", "clip,lt"];
    args.extend_from_slice(TINY);
    let r = lowq(&args);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    // fc+clip is shared by both pairs: three distinct arms over three seeds.
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    assert!(csv.starts_with("arm,seed,"));
    let text = fs::read_to_string(out.join("comparison.txt")).unwrap();
    assert!(text.contains("final loss: fc < bilinear"));
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("clip.stability = "));
    assert!(fs::read_to_string(out.join("config.txt"))
        .unwrap()
        .contains("pairs = clip,lt\n"));
    let runs: Vec<_> = fs::read_dir(out.join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 9);
    for run in runs {
        let run = run.unwrap().path();
        for f in ["config.txt", "loss.csv", "summary.txt"] {
            assert!(run.join(f).is_file(), "{}", run.display());
        }
    }
}
