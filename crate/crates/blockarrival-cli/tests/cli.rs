//! End-to-end runs of the installed binary: exit codes, stdout summary
//! JSON, file outputs, and the rerun-gives-identical-bytes guarantee.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockarrival"))
}

fn run_ok(args: &[&str]) -> Value {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    serde_json::from_str(stdout.lines().last().unwrap()).unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not signal-killed")
}

const DISPLACED_CHAIN: &str = "height,time,difficulty\n\
0,10,1\n1,20,1\n2,70,1\n3,80,1\n4,30,1\n5,40,1\n6,50,1\n7,60,1\n";

#[test]
fn predict_reports_steady_state() {
    let v = run_ok(&["predict", "--a", "2.72e-7"]);
    let block = v["block_time_s"].as_f64().unwrap();
    assert!((464.9..465.0).contains(&block), "block_time_s = {block}");
    let segment = v["segment_time_s"].as_f64().unwrap();
    assert!((segment - 937_371.7).abs() < 1.0, "segment_time_s = {segment}");
    let a_f = v["a_per_fortnight"].as_f64().unwrap();
    assert!((a_f - 2.72e-7 * 1_209_600.0).abs() < 1e-5, "a_per_fortnight = {a_f}");
}

#[test]
fn clean_flags_displaced_pair_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    std::fs::write(&raw, DISPLACED_CHAIN).unwrap();
    let out = dir.path().join("clean.csv");
    let args = [
        "clean",
        "--in",
        raw.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "42",
        "--cutoff",
        "0",
    ];

    let v = run_ok(&args);
    assert_eq!(v["negative_interarrivals"], 1);
    assert_eq!(v["kept_records"], 8);
    assert_eq!(v["flagged"], 2);
    assert_eq!(v["resampled"], 2);
    assert_eq!(v["strategy"], "resample-lis-intersection");

    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("# argv: "), "missing invocation echo");
    let cleaned = blockarrival::parse_chain(&text).unwrap();
    assert_eq!(cleaned.provenance(), blockarrival::Provenance::CleanedLr);
    let times: Vec<i64> = cleaned.times().collect();
    assert!(times.windows(2).all(|w| w[1] >= w[0]), "not sorted: {times:?}");
    for h in [2usize, 3] {
        assert!(
            times[h] > 20 && times[h] < 30,
            "height {h} resampled to {} outside its anchors",
            times[h]
        );
    }

    run_ok(&args);
    let second = std::fs::read(&out).unwrap();
    assert_eq!(first, second, "rerun with identical argv changed the output");
}

const SIM_CONFIG: &str = r#"{
  "hash_model": {"kind": "exponential", "a": 1e-7, "b": 20.0},
  "difficulty_mode": "random",
  "delay": {"kind": "none"},
  "initial_difficulty": 70.0,
  "start_time": 0.0,
  "n_blocks": 50,
  "seed": 9
}"#;

fn write_sim_outputs(dir: &Path) -> (Value, Vec<u8>) {
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, SIM_CONFIG).unwrap();
    let arrivals = dir.join("arrivals.csv");
    let summary = dir.join("summary.json");
    let v = run_ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        arrivals.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    (v, std::fs::read(&arrivals).unwrap())
}

#[test]
fn simulate_writes_arrivals_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (v, first) = write_sim_outputs(dir.path());
    assert_eq!(v["n"], 50);
    assert_eq!(v["complete"], true);
    assert_eq!(v["difficulty_changes"], 0);
    assert_eq!(v["seed"], 9);
    assert!(v["mean_s"].as_f64().unwrap() > 0.0);

    let text = String::from_utf8(first.clone()).unwrap();
    let times: Vec<f64> = text
        .lines()
        .skip(2) // argv echo + column header
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(times.len(), 50);
    assert!(times.windows(2).all(|w| w[1] > w[0]));

    let summary_file: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary_file["n"], v["n"]);

    let (_, second) = write_sim_outputs(dir.path());
    assert_eq!(first, second, "rerun with identical argv changed the output");
}

#[test]
fn analyze_consumes_simulated_arrivals() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _) = write_sim_outputs(dir.path());
    let arrivals = dir.path().join("arrivals.csv");

    let v = run_ok(&[
        "analyze",
        "lilliefors",
        "--in",
        arrivals.to_str().unwrap(),
        "--seed",
        "5",
        "--n-mc",
        "999",
    ]);
    assert_eq!(v["n"], 49); // gaps between 50 arrivals
    let p = v["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert_eq!(v["n_mc"], 999);

    let prof = dir.path().join("profile.csv");
    let v = run_ok(&[
        "analyze",
        "profile",
        "--in",
        arrivals.to_str().unwrap(),
        "--first-height",
        "1",
        "--out",
        prof.to_str().unwrap(),
    ]);
    assert!(v["overall_mean_s"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(&prof).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# argv: "));
    assert_eq!(lines.next().unwrap(), "position,mean_s,count");
    assert!(lines.next().unwrap().starts_with("1,"));

    let surv = dir.path().join("survivor.csv");
    let v = run_ok(&[
        "analyze",
        "survivor",
        "--in",
        arrivals.to_str().unwrap(),
        "--out",
        surv.to_str().unwrap(),
    ]);
    assert_eq!(v["n"], 49);
    let text = std::fs::read_to_string(&surv).unwrap();
    assert!(text.lines().count() > 10);
}

#[test]
fn reproduce_fig12_writes_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "reproduce",
        "fig12",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--seed",
        "3",
        "--points",
        "2",
        "--blocks",
        "2016",
    ];
    let v = run_ok(&args);
    assert_eq!(v["recipe"], "fig12");
    let csv_path = dir.path().join("fig12.csv");
    let first = std::fs::read(&csv_path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let data: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(data.len(), 2);
    for row in data {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        let (mean, steady, rel) = (cols[1], cols[2], cols[3]);
        assert!(mean > 0.0 && steady > 0.0);
        // One segment is all transient, so only a units-level blunder trips this.
        assert!(rel.abs() < 0.5, "single-segment run wildly off: {row}");
    }
    run_ok(&args);
    assert_eq!(first, std::fs::read(&csv_path).unwrap());
}

#[test]
fn errors_set_the_documented_exit_codes() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(exit_code(&out), 2, "unknown subcommand is a usage error");

    let out = bin()
        .args(["clean", "--in", "/nonexistent.csv", "--out", "/tmp/x.csv", "--seed", "1"])
        .output().unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    // randomized recipes refuse to run without a seed
    let out = bin().args(["reproduce", "table2", "--out-dir", "/tmp"]).output().unwrap();
    assert_eq!(exit_code(&out), 2);

    let out = bin()
        .args(["reproduce", "nosuch", "--out-dir", "/tmp", "--seed", "1"])
        .output().unwrap();
    assert_eq!(exit_code(&out), 1);

    let out = bin().arg("--help").output().unwrap();
    assert_eq!(exit_code(&out), 0);
}
