//! Runs every example binary with small arguments. `cargo test` builds the
//! examples next to the test executables, so no nested cargo call is needed.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> Command {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let path: PathBuf = deps.parent().unwrap().join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    assert!(path.exists(), "{} not built; run through `cargo test`", path.display());
    Command::new(path)
}

fn run(name: &str, args: &[&str]) -> String {
    let out = example(name).args(args).output().unwrap();
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn autodiff() {
    assert!(run("autodiff", &[]).contains("max relative error"));
}

#[test]
fn layers() {
    let s = run("layers", &[]);
    assert!(s.contains("undirected graph (19 nonzeros, symmetric: true)"));
    assert!(s.contains("directed tree (13 nonzeros, symmetric: false)"));
}

#[test]
fn data_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = run("data_files", &[dir.path().to_str().unwrap()]);
    assert!(s.contains("label counts (pos/neu/neg): 1/0/1"));
    assert!(dir.path().join("train.jsonl").exists());
}

#[test]
fn train_synthetic() {
    let s = run("train_synthetic", &["asgcn-dt", "2"]);
    assert!(s.contains("epoch  2"));
    assert!(s.contains("macro-F1"));
}

#[test]
fn checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let s = run("checkpoint", &[path.to_str().unwrap()]);
    assert!(path.exists());
    assert_eq!(s.matches("aspect `").count(), 2);
}

#[test]
fn evaluation() {
    let s = run("evaluation", &[]);
    assert!(s.contains("per-example") && s.contains("per-run"));
}

#[test]
fn heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.html");
    run("heatmap", &[path.to_str().unwrap()]);
    assert!(std::fs::read_to_string(path).unwrap().starts_with("<!DOCTYPE html>"));
}

#[test]
fn layer_sweep() {
    let s = run("layer_sweep", &["1,2"]);
    assert_eq!(s.lines().filter(|l| l.starts_with("1\t") || l.starts_with("2\t")).count(), 2);
}

#[test]
fn throughput() {
    assert!(run("throughput", &["4", "5", "6"]).contains("ms/example"));
}

#[test]
fn benchmark_reports_missing_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = example("benchmark").env("ASGCN_DATA", dir.path()).args(["rest14", "none.txt"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("preprocessor"));
}
