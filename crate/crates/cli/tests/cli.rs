use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use projclust_cli::experiment::ExperimentConfig;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_projclust"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const FOUR: &str = "0,0\n2,0\n10,0\n12,0\n";

#[test]
fn fit_four_points_costs_four() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "four.csv", FOUR);
    let v = json_ok(&["fit", "--input", &input, "--family", "kcenters", "-k", "2", "--z", "2"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "fit");
    assert_eq!(v["result"]["fit"]["cost"], 4.0);
    assert_eq!(v["provenance"]["methods"][0], "k-means-lloyd");
    let exact = json_ok(&["fit", "--input", &input, "-k", "2", "--exact"]);
    assert_eq!(exact["result"]["fit"]["cost"], 4.0);
}

#[test]
fn single_point_coreset_is_itself() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "one.csv", "3,4\n");
    let v = json_ok(&["coreset", "--input", &input, "--epsilon", "1.0"]);
    assert_eq!(v["result"]["coreset"]["indices"], serde_json::json!([0]));
    assert_eq!(v["result"]["coreset"]["weights"], serde_json::json!([1.0]));
}

#[test]
fn evaluating_the_input_against_itself_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "four.csv", FOUR);
    let weighted = write(dir.path(), "four_w.csv", "0,0,1\n2,0,1\n10,0,1\n12,0,1\n");
    for family in ["kcenters", "klines", "jflat"] {
        let v = json_ok(&["evaluate", "--input", &input, "--family", family, "-k", "2", "--coreset-points", &weighted]);
        assert_eq!(v["result"]["report"]["max_error"], 0.0, "{family}");
    }
}

#[test]
fn pipeline_artifacts_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let input = d.join("mix.csv");
    let input = input.to_str().unwrap();
    let gen = run(&["generate", "--generator", "mixture", "-n", "200", "-d", "2", "-k", "2", "--seed", "3", "--output", input]);
    assert!(gen.status.success());
    let fit = d.join("fit.json");
    let prof = d.join("prof.json");
    let core = d.join("core.json");
    let pts = d.join("core.csv");
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    ok(&["fit", "--input", input, "-k", "2", "--output", &s(&fit)]);
    ok(&["sensitivity", "--input", input, "-k", "2", "--fit", &s(&fit), "--output", &s(&prof)]);
    ok(&[
        "coreset", "--input", input, "-k", "2", "--epsilon", "0.5", "--size-constant", "0.01", "--profile", &s(&prof),
        "--points-output", &s(&pts), "--output", &s(&core), "--seed", "9",
    ]);
    let a = json_ok(&["evaluate", "--input", input, "-k", "2", "--coreset", &s(&core), "--n-random", "10"]);
    let b = json_ok(&["evaluate", "--input", input, "-k", "2", "--coreset-points", &s(&pts), "--n-random", "10"]);
    assert_eq!(a["result"]["report"], b["result"]["report"]);
    let err = a["result"]["report"]["max_error"].as_f64().unwrap();
    assert!(err.is_finite() && err >= 0.0);
}

#[test]
fn lowerbound_table() {
    let v = json_ok(&["lowerbound", "-n", "3"]);
    let row = &v["result"]["table"][0];
    assert_eq!(row["i"], 1);
    assert_eq!(row["ratio"], 0.4);
    assert_eq!(v["result"]["points"].as_array().unwrap().len(), 3);
    let two = json_ok(&["lowerbound", "-n", "2"]);
    assert_eq!(two["result"]["table"].as_array().unwrap().len(), 2);
    let big = json_ok(&["lowerbound", "-n", "600"]);
    assert!(big["result"]["points"].is_null());
    let totals: Vec<f64> = [2, 3, 10, 100]
        .iter()
        .map(|n| json_ok(&["lowerbound", "-n", &n.to_string()])["result"]["total"].as_f64().unwrap())
        .collect();
    assert!(totals.windows(2).all(|w| w[0] < w[1]), "{totals:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "four.csv", FOUR);
    assert_eq!(run(&["fit", "--input", &input, "--z", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", &input, "--z", "0.5", "--experimental-z"]).status.code(), Some(0));
    assert_eq!(run(&["fit", "--input", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(run(&["coreset", "--input", &input, "--epsilon", "0"]).status.code(), Some(2));
    assert_eq!(run(&["lowerbound", "-n", "1"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.csv", "0,0\n1,x\n");
    assert_eq!(run(&["fit", "--input", &bad]).status.code(), Some(2));
    let oracle = run(&["sensitivity", "--input", &input, "--method", "oracle", "--family", "kjflats", "-k", "2"]);
    assert_eq!(oracle.status.code(), Some(3));
    let rows: String = (0..16).map(|i| format!("{i},0\n")).collect();
    let many = write(dir.path(), "many.csv", &rows);
    assert_eq!(run(&["fit", "--input", &many, "-k", "2", "--exact"]).status.code(), Some(3));
}

#[test]
fn commands_are_deterministic_given_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("lines.csv");
    let input = input.to_str().unwrap();
    assert!(run(&["generate", "--generator", "lines", "-n", "120", "-d", "3", "-k", "2", "--seed", "4", "--output", input])
        .status
        .success());
    let args = ["coreset", "--input", input, "--family", "klines", "-k", "2", "--budget", "40", "--epsilon", "0.5", "--seed", "5"];
    let a = run(&args);
    let b = run(&[&["--threads", "1"], &args[..]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["profile"]["flags"]["floor_mixed"], true);
}

#[test]
fn experiment_configs_round_trip_canonically() {
    for name in ["vs_uniform", "dim_independence", "growth_lowerbound"] {
        let text = std::fs::read_to_string(golden_dir().join(format!("{name}.json"))).unwrap();
        let c = ExperimentConfig::from_json(&text).unwrap();
        let canon = c.canonical();
        assert_eq!(ExperimentConfig::from_json(&canon).unwrap().canonical(), canon);
    }
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs a pinned config and compares table and report byte for byte.
/// Set `PROJCLUST_BLESS=1` to rewrite the expected files.
fn golden(name: &str, threads: &str) {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let report = dir.path().join("report.json");
    let config = golden_dir().join(format!("{name}.json"));
    let out = run(&[
        "--threads",
        threads,
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = golden_dir().join("expected");
    for (got, file) in [(table, format!("{name}.csv")), (report, format!("{name}.report.json"))] {
        let got = std::fs::read(got).unwrap();
        let want = expected.join(&file);
        if std::env::var_os("PROJCLUST_BLESS").is_some() {
            std::fs::create_dir_all(&expected).unwrap();
            std::fs::write(&want, &got).unwrap();
            continue;
        }
        let want = std::fs::read(&want).unwrap_or_else(|_| panic!("missing golden {file}"));
        assert!(got == want, "{file} differs from the pinned golden:\n{}", String::from_utf8_lossy(&got));
    }
}

#[test]
fn golden_sensitivity_vs_uniform() {
    golden("vs_uniform", "4");
}

#[test]
fn golden_dim_independence() {
    golden("dim_independence", "1");
}

#[test]
fn golden_growth_on_lowerbound_instance() {
    golden("growth_lowerbound", "3");
}
