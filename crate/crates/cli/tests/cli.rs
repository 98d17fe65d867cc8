use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use felm::io::load_model;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn felm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_felm")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = felm(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sha(path: PathBuf) -> String {
    Sha256::digest(std::fs::read(path).unwrap()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Temp dir holding the default dataset and a fit2felm model.
fn trained() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(&["gen-data", "--out", "data.csv"], dir.path());
    ok(&["train", "--data", "data.csv", "--model", "model.json"], dir.path());
    dir
}

#[test]
fn gen_data_defaults_and_counts() {
    let dir = TempDir::new().unwrap();
    ok(&["gen-data", "--out", "a.csv"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r180,r172,r164,r156,r148,label"));
    assert_eq!(lines.count(), 788);

    ok(&["gen-data", "--out", "small.csv", "--wall", "10", "--corner", "10"], dir.path());
    let small = std::fs::read_to_string(dir.path().join("small.csv")).unwrap();
    assert_eq!(small.lines().count(), 21);
}

#[test]
fn gen_data_is_reproducible_and_manifested() {
    let dir = TempDir::new().unwrap();
    ok(&["gen-data", "--out", "a.csv", "--seed", "4"], dir.path());
    ok(&["gen-data", "--out", "b.csv", "--seed", "4"], dir.path());
    ok(&["gen-data", "--out", "c.csv", "--seed", "5"], dir.path());
    assert_eq!(sha(dir.path().join("a.csv")), sha(dir.path().join("b.csv")));
    assert_ne!(sha(dir.path().join("a.csv")), sha(dir.path().join("c.csv")));

    let m = json(dir.path().join("a.csv.manifest.json"));
    assert_eq!(m["command"], "gen-data");
    assert_eq!(m["seed"], 4);
    assert_eq!(m["config"]["data"]["seed"], 4);
    assert_eq!(m["outputs"][0]["sha256"], sha(dir.path().join("a.csv")));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[data]\nwall = 7\ncorner = 9\nseed = 2\n").unwrap();
    ok(&["gen-data", "--config", "run.toml", "--out", "a.csv", "--corner", "3"], dir.path());
    let m = json(dir.path().join("a.csv.manifest.json"));
    assert_eq!(m["config"]["data"]["wall"], 7);
    assert_eq!(m["config"]["data"]["corner"], 3);
    assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap().lines().count(), 11);

    std::fs::write(dir.path().join("bad.toml"), "[data]\nwall = \"many\"\n").unwrap();
    assert_eq!(code(&felm(&["gen-data", "--config", "bad.toml", "--out", "b.csv"], dir.path())), 1);
}

#[test]
fn train_reports_cross_validation() {
    let dir = trained();
    let report = json(dir.path().join("model.json.report.json"));
    assert_eq!(report["format"], "felm-eval-report");
    assert_eq!(report["manifest"], "model.json.manifest.json");
    let cv = &report["cross_validation"];
    assert_eq!(cv["folds"], 5);
    assert_eq!(cv["per_fold"].as_array().unwrap().len(), 5);
    assert!(cv["mean_test_accuracy"].as_f64().unwrap() > 50.0);
    assert!(cv["mean_train_accuracy"].as_f64().unwrap() > 50.0);
    assert!(cv["mean_train_time_s"].as_f64().unwrap() >= 0.0);
    let m = json(dir.path().join("model.json.manifest.json"));
    assert_eq!(m["inputs"][0]["sha256"], sha(dir.path().join("data.csv")));
}

#[test]
fn sc_and_km_models_match() {
    let dir = trained();
    ok(&["train", "--data", "data.csv", "--model", "km.json", "--trainer", "it2felm-km"], dir.path());
    let sc = load_model(&std::fs::read_to_string(dir.path().join("model.json")).unwrap()).unwrap();
    let km = load_model(&std::fs::read_to_string(dir.path().join("km.json")).unwrap()).unwrap();
    let (sc, km) = (sc.as_tsk().unwrap().flat_consequents(), km.as_tsk().unwrap().flat_consequents());
    assert_eq!(sc.len(), km.len());
    for (a, b) in sc.iter().zip(&km) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn train_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    ok(&["gen-data", "--out", "data.csv", "--wall", "10", "--corner", "10"], dir.path());
    assert_eq!(code(&felm(&["train", "--data", "data.csv", "--model", "m.json", "--folds", "1"], dir.path())), 1);
    assert_eq!(code(&felm(&["train", "--data", "data.csv", "--model", "m.json", "--trainer", "svm"], dir.path())), 1);
    assert_eq!(code(&felm(&["train", "--data", "missing.csv", "--model", "m.json"], dir.path())), 2);

    std::fs::write(dir.path().join("broken.csv"), "r180,r172,r164,r156,r148,label\n1,1,1,1,1,0\n1,1,x,1,1,1\n").unwrap();
    let out = felm(&["train", "--data", "broken.csv", "--model", "m.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn reduce_bench_schema() {
    let dir = TempDir::new().unwrap();
    ok(&["reduce-bench", "--out", "bench.json", "--rules", "1,6", "--instances", "2000", "--batch", "50"], dir.path());
    let b = json(dir.path().join("bench.json"));
    assert_eq!(b["format"], "felm-bench");
    let entries = b["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["violations"], 0);
        for key in ["sc_median_ns", "km_median_ns", "wm_median_ns"] {
            assert!(e[key].as_f64().unwrap() > 0.0, "{key}");
        }
    }
    assert_eq!(code(&felm(&["reduce-bench", "--out", "b.json", "--rules", "0"], dir.path())), 1);
}

#[test]
fn simulate_completes_and_summarises() {
    let dir = trained();
    ok(&["simulate", "--model", "model.json", "--log", "log.csv", "--assert"], dir.path());
    let s = json(dir.path().join("log.csv.summary.json"));
    assert_eq!(s["format"], "felm-mission-summary");
    assert_eq!(s["completed"], true);
    assert_eq!(s["circuits_completed"], 2);
    let depths: Vec<f64> = s["circuits"].as_array().unwrap().iter().map(|c| c["depth"].as_f64().unwrap()).collect();
    assert_eq!(depths, vec![0.0, 2.0]);

    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    let rows = log.lines().count() - 1;
    let c = &s["confusion"];
    let total: u64 = ["true_positive", "false_positive", "false_negative", "true_negative"].iter().map(|k| c[k].as_u64().unwrap()).sum();
    assert_eq!(total as usize, rows);
    assert_eq!(s["steps"].as_u64().unwrap() as usize, rows);
}

#[test]
fn simulate_seed_changes_trajectory_not_schema() {
    let dir = trained();
    ok(&["simulate", "--model", "model.json", "--log", "a.csv", "--seed", "1"], dir.path());
    ok(&["simulate", "--model", "model.json", "--log", "b.csv", "--seed", "2"], dir.path());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a.lines().next(), b.lines().next());
    assert_ne!(a, b);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = trained();
    std::fs::write(dir.path().join("m.toml"), "[mission]\nseed = 3\ncircuits = 1\n").unwrap();
    ok(&["simulate", "--config", "m.toml", "--model", "model.json", "--log", "a.csv"], dir.path());
    ok(&["simulate", "--config", "a.csv.manifest.json", "--model", "model.json", "--log", "b.csv"], dir.path());
    assert_eq!(sha(dir.path().join("a.csv")), sha(dir.path().join("b.csv")));
    assert_eq!(json(dir.path().join("b.csv.manifest.json"))["config"]["mission"]["circuits"], 1);
}

#[test]
fn simulate_rejects_bad_models() {
    let dir = trained();
    assert_eq!(code(&felm(&["simulate", "--model", "nope.json", "--log", "l.csv"], dir.path())), 2);
    let text = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    std::fs::write(dir.path().join("v9.json"), text.replace("\"version\": 1", "\"version\": 9")).unwrap();
    let out = felm(&["simulate", "--model", "v9.json", "--log", "l.csv"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn failed_assertions_exit_3() {
    let dir = trained();
    // heavy sonar noise: the mission still finishes but misses the accuracy floor
    std::fs::write(dir.path().join("noisy.toml"), "[mission]\nsonar_noise = 0.25\ncircuits = 1\n").unwrap();
    let out = felm(&["simulate", "--config", "noisy.toml", "--model", "model.json", "--log", "l.csv", "--assert"], dir.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&felm(&["nonsense"], dir.path())), 1);
    assert_eq!(code(&felm(&["gen-data"], dir.path())), 1);
    assert_eq!(code(&felm(&["--help"], dir.path())), 0);
}
