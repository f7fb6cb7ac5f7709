use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use defect_perc::sampler::{CanonicalCurve, MicrocanonicalCurve};
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defect-perc"))
        .args(args)
        .env("DEFECT_PERC_OUT", dir)
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn files(dir: &Path, prefix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with(prefix))
        .collect();
    v.sort();
    v
}

/// Curve JSON without the run-provenance fields that may legitimately differ.
fn numerical(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let meta = v["meta"].as_object_mut().unwrap();
    meta.remove("workers");
    meta.remove("timestamp");
    v
}

fn strs(paths: &[PathBuf]) -> Vec<&str> {
    paths.iter().map(|p| p.to_str().unwrap()).collect()
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let mut reference: Option<Vec<Value>> = None;
    for workers in ["1", "4", "8"] {
        let dir = tempfile::tempdir().unwrap();
        ok(
            dir.path(),
            &["sweep", "--d", "3", "--s", "2", "--L", "3,4", "--p", "0.1", "--realizations", "400", "--seed", "7", "--workers", workers],
        );
        let got: Vec<Value> = files(dir.path(), "micro_").iter().map(|p| numerical(p)).collect();
        assert_eq!(got.len(), 2);
        match &reference {
            None => reference = Some(got),
            Some(r) => assert_eq!(&got, r, "workers = {workers}"),
        }
    }
}

#[test]
fn sweep_file_is_consistent_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sweep", "--d", "3", "--s", "2", "--L", "4", "--p", "0.1", "--realizations", "1000", "--seed", "7"],
    );
    let path = &files(dir.path(), "micro_")[0];
    let text = fs::read_to_string(path).unwrap();
    let curve = MicrocanonicalCurve::from_json(&text).unwrap();
    assert!(*curve.counts.last().unwrap() <= 1000);
    assert_eq!(curve.meta.realizations, 1000);
    assert!(curve.meta.config_hash.is_some());
    let again = curve.to_json().unwrap();
    assert_eq!(MicrocanonicalCurve::from_json(&again).unwrap(), curve);
    assert_eq!(again, text);
}

#[test]
fn zero_realizations_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["sweep", "--d", "3", "--s", "2", "--L", "4", "--realizations", "0"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("realizations"));
}

#[test]
fn convolve_endpoints_are_the_extreme_counts() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sweep", "--d", "3", "--s", "2", "--L", "3", "--p", "0.1", "--realizations", "300", "--seed", "3"],
    );
    let micro = &files(dir.path(), "micro_")[0];
    ok(dir.path(), &["convolve", micro.to_str().unwrap(), "--sigma-grid", "0,0.5,1"]);
    let curve = MicrocanonicalCurve::from_json(&fs::read_to_string(micro).unwrap()).unwrap();
    let canon = &files(dir.path(), "canonical_")[0];
    let c = CanonicalCurve::from_json(&fs::read_to_string(canon).unwrap()).unwrap();
    let r = curve.trials() as f64;
    assert_eq!(c.values[0], curve.counts[0] as f64 / r);
    assert_eq!(c.values[2], *curve.counts.last().unwrap() as f64 / r);
}

#[test]
fn estimate_needs_three_sizes() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sweep", "--d", "3", "--s", "2", "--L", "3,4", "--realizations", "200"],
    );
    let micro = files(dir.path(), "micro_");
    let mut args = vec!["convolve"];
    args.extend(strs(&micro));
    args.extend(["--sigma-grid", "0.3:0.7:0.01"]);
    ok(dir.path(), &args);
    let canon = files(dir.path(), "canonical_");
    let mut args = vec!["estimate"];
    args.extend(strs(&canon));
    let out = run(dir.path(), &args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 3 box sizes"));
}

#[test]
fn mixed_provenance_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    for (sizes, seed) in [("3,4", "1"), ("5", "2")] {
        ok(
            dir.path(),
            &["sweep", "--d", "3", "--s", "2", "--L", sizes, "--realizations", "500", "--seed", seed],
        );
    }
    let micro = files(dir.path(), "micro_");
    let mut args = vec!["convolve"];
    args.extend(strs(&micro));
    args.extend(["--sigma-grid", "0.4:0.6:0.002"]);
    ok(dir.path(), &args);
    let canon = files(dir.path(), "canonical_");
    let mut args = vec!["estimate"];
    args.extend(strs(&canon));
    let out = run(dir.path(), &args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("different run configurations"));
    args.push("--force");
    ok(dir.path(), &args);
}

#[test]
fn planar_pipeline_recovers_one_half() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sweep", "--d", "3", "--s", "2", "--L", "4,6,8", "--p", "0", "--realizations", "5000", "--seed", "42"],
    );
    let micro = files(dir.path(), "micro_");
    let mut args = vec!["convolve"];
    args.extend(strs(&micro));
    args.extend(["--sigma-grid", "0.4:0.6:0.002"]);
    ok(dir.path(), &args);
    let canon = files(dir.path(), "canonical_");
    let mut args = vec!["estimate"];
    args.extend(strs(&canon));
    ok(dir.path(), &args);
    let csv = fs::read_to_string(dir.path().join("critical_curve_d3_s2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("p,sigma_star,stat_err,sys_err,combined_err,L_list,realizations")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let sigma: f64 = row[1].parse().unwrap();
    assert!((0.48..=0.52).contains(&sigma), "sigma* = {sigma}");
    assert_eq!(row[5], "4;6;8");
}

#[test]
fn meanfield_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["meanfield", "--d", "3", "--s", "2", "--p-grid", "0,0.1"]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("wrote ")).collect();
    assert_eq!(rows[0], "p,sigma_mf,sigma_mf_cubic,valid");
    assert!(rows[1].starts_with("0,0.5,0.5,true"));
    let mf: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((mf - 0.498999).abs() < 1e-6);
}

#[test]
fn animals_command_writes_census_and_refuses_large_caps() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["animals", "--d", "3", "--s", "2", "--max-edges", "4", "--p", "0.5", "--sigma", "0.5"],
    );
    assert!(out.contains("identity violations: 0"));
    assert!(out.contains("edges,0,0.015625"));
    let census = fs::read_to_string(dir.path().join("census_d3_s2_n4.csv")).unwrap();
    assert!(census.lines().nth(1) == Some("v,n,m,t,r,count"));
    assert!(census.contains("\n1,0,0,2,4,1\n"));
    let refused = run(dir.path(), &["animals", "--d", "3", "--s", "2", "--max-edges", "9"]);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("cap"));
}

#[test]
fn cluster_dist_and_audit_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["cluster-dist", "--d", "3", "--s", "2", "--N", "8", "--p", "0.1", "--sigma", "0.1", "--samples", "200000", "--seed", "3", "--format", "csv"],
    );
    assert!(out.contains("alpha = 1.0000"), "{out}");
    let csv = fs::read_to_string(dir.path().join("cluster_d3_s2_N8_p0.1_sigma0.1.csv")).unwrap();
    assert!(csv.lines().nth(1) == Some("size,vertex_count,edge_count"));
    let out = ok(
        dir.path(),
        &["audit-ineq", "--d", "3", "--s", "2", "--N", "6", "--p", "0.05", "--sigma", "0.2", "--gamma", "0.1", "--samples", "20000", "--seed", "5"],
    );
    assert_eq!(out.matches("PASS").count(), 2, "{out}");
    let refused = run(
        dir.path(),
        &["audit-ineq", "--d", "3", "--s", "2", "--N", "6", "--p", "0.3", "--sigma", "0.2", "--gamma", "0.1", "--samples", "2000"],
    );
    assert!(!refused.status.success());
}

#[test]
fn homog_writes_curves_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["homog", "--d", "3", "--L", "3,4,5", "--realizations", "1000", "--seed", "9"],
    );
    assert!(out.contains("p_c(3) = "), "{out}");
    assert_eq!(files(dir.path(), "homog_micro_").len(), 3);
    assert_eq!(files(dir.path(), "homog_canonical_").len(), 3);
    assert!(dir.path().join("homog_estimate_d3.json").exists());
}
