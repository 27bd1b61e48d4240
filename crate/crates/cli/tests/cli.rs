use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn spacelike(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacelike"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPACELIKE_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Rows of a CSV file as maps from header name to field.
fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(str::to_owned)).collect()).collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn gue_diagonal_at_level_one_is_gaussian() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["kernel", "--name", "gue", "--diag", "--n", "1", "--t", "1", "--xmin", "-3", "--xmax", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("kernel.csv"));
    assert_eq!(rows.len(), 61);
    for r in &rows {
        let x = num(r, "x1");
        let density = (-x * x).exp() / std::f64::consts::PI.sqrt();
        assert!((num(r, "value") - density).abs() < 1e-10, "x={x}");
        assert!(num(r, "error_estimate") >= 0.0);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["name"], "gue");
    assert!(manifest["seed"].is_null());
}

#[test]
fn discrete_level_one_matches_poisson() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["kernel", "--name", "discrete", "--n", "1", "--t", "1", "--x", "-1"]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&dir.path().join("kernel.csv"));
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0], "value") - (-1f64).exp()).abs() < 1e-12);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    spacelike(dir.path(), &["kernel", "--name", "gue", "--x", "0.1"]);
    let rows = read_csv(&dir.path().join("kernel.csv"));
    let mantissa = rows[0]["value"].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&spacelike(dir.path(), &["kernel", "--name", "bogus"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["kernel"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["kernel", "--name", "lue", "--x", "1"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["kernel", "--name", "gue", "--x", "0", "--epsilon", "-1"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["simulate", "--model", "dbm-minors", "--times", "1,0.5"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["verify"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn quadrature_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    let args = ["kernel", "--name", "gue", "--n", "2", "--x", "0.3", "--y", "0.5", "--n2", "2", "--t2", "0.5", "--tol", "1e-300"];
    assert_eq!(code(&spacelike(dir.path(), &args)), 3);
}

#[test]
fn simulation_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["simulate", "--model", "wishart", "--size", "2", "--p", "3", "--samples", "250", "--chunk", "40", "--times", "0.5,1"];
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(code(&spacelike(dir.path(), &args)), 0);
    let (csv, manifest) = (read("wishart.csv"), read("wishart.manifest.json"));
    assert_eq!(code(&spacelike(dir.path(), &args)), 0);
    assert_eq!(csv, read("wishart.csv"));
    assert_eq!(manifest, read("wishart.manifest.json"));
    let mut other = args.to_vec();
    other.extend(["--seed", "7"]);
    spacelike(dir.path(), &other);
    assert_ne!(csv, read("wishart.csv"));
}

#[test]
fn dbm_minors_emit_interlaced_triples() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["simulate", "--model", "dbm-minors", "--size", "3", "--samples", "200", "--seed", "11"]);
    assert_eq!(code(&o), 0);
    let mut by_level: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in read_csv(&dir.path().join("dbm-minors.csv")) {
        by_level.entry((r["sample"].parse().unwrap(), r["level"].parse().unwrap())).or_default().push(num(&r, "lambda"));
    }
    for s in 0..200 {
        let (l2, l3) = (&by_level[&(s, 2)], &by_level[&(s, 3)]);
        assert_eq!(l3.len(), 3);
        assert_eq!(by_level[&(s, 1)].len(), 1);
        for k in 0..2 {
            assert!(l3[k] <= l2[k] && l2[k] <= l3[k + 1], "sample {s}");
        }
    }
}

#[test]
fn particles_emit_one_position_per_particle() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["simulate", "--model", "particles", "--n", "2", "--t", "1", "--samples", "50"]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&dir.path().join("particles.csv"));
    assert_eq!(rows.len(), 150);
    let mut per_run: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for r in &rows {
        per_run.entry(r["run_id"].clone()).or_default().push(r["position"].parse().unwrap());
    }
    assert_eq!(per_run.len(), 50);
    for x in per_run.values() {
        // Rows are level 1, then level 2 left to right: x_1^2 < x_1^1 ≤ x_2^2.
        assert!(x[1] < x[0] && x[0] <= x[2]);
    }
}

#[test]
fn eynard_suite_passes_and_canary_fails() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["verify", "--suite", "eynard", "--trials", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify-eynard.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["manifest"]["seed"], 2024);
    assert_eq!(report["manifest"]["config"]["eynard"]["specs"], 6);

    let o = spacelike(dir.path(), &["verify", "--suite", "eynard", "--trials", "6", "--tolerance-scale", "1e-30"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn small_monte_carlo_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = spacelike(dir.path(), &["verify", "--suite", "montecarlo", "--samples", "3000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

const SPEC: &str = r#"{"set_sizes":[2,3],"copies":[0,1],
 "phi":[[],[[1.0,0.5,0.2],[0.3,1.0,0.7]]],
 "phi_virt":[[1.0,0.8],[1.0,1.0,1.0]],
 "transitions":[[],[[[1.0,0.2,0.1],[0.3,1.0,0.4],[0.2,0.5,1.0]]]],
 "psi":[[1.0,0.3,0.6],[0.2,[0.9,0.1],0.5]]}"#;

#[test]
fn eynard_check_reads_spec_files() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
    let o = spacelike(dir.path(), &["eynard-check", "spec.json", "--max-points", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // 8 points: 8 singletons, 28 pairs, 56 triples.
    assert_eq!(read_csv(&dir.path().join("eynard-check.csv")).len(), 92);

    std::fs::write(dir.path().join("broken.json"), r#"{"set_sizes":[2]}"#).unwrap();
    assert_eq!(code(&spacelike(dir.path(), &["eynard-check", "broken.json"])), 2);
    assert_eq!(code(&spacelike(dir.path(), &["eynard-check", "missing.json"])), 2);
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = "out = \"from-config\"\n[kernel]\nname = \"gue\"\nn = 2\nx = 0.5\n";
    std::fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let o = spacelike(dir.path(), &["--config", "run.toml", "kernel", "--n", "1"]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&dir.path().join("from-config/kernel.csv"));
    assert_eq!(rows[0]["n1"], "1");
    assert_eq!(num(&rows[0], "x1"), 0.5);

    std::fs::write(dir.path().join("bad.toml"), "[kernel]\nunknown = 1\n").unwrap();
    assert_eq!(code(&spacelike(dir.path(), &["--config", "bad.toml", "kernel"])), 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spacelike"))
        .args(["kernel", "--name", "scaled", "--x", "0"])
        .current_dir(dir.path())
        .env("SPACELIKE_OUT", "env-out")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("env-out/kernel.csv").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_spacelike"))
        .args(["--out", "flag-out", "kernel", "--name", "scaled", "--x", "0"])
        .current_dir(dir.path())
        .env("SPACELIKE_OUT", "env-out2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("flag-out/kernel.csv").exists());
    assert!(!dir.path().join("env-out2").exists());
}
