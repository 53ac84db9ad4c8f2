use std::process::{Command, Output};

use serde_json::Value;

fn fchaos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fchaos"))
        .args(args)
        .env_remove("FCHAOS_MAX_TENSOR_ENTRIES")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    let mut v: Value = serde_json::from_slice(&out.stdout).expect("JSON report on stdout");
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn passing_experiment_exits_zero() {
    let out = fchaos(&["--experiment", "transfer-5.2", "--T", "1", "--N", "256"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = report(&out);
    assert_eq!(v["experiment"], "transfer-5.2");
    assert_eq!(v["values"]["wigner_free"], true);
    assert_eq!(v["values"]["poisson_free"], false);
    assert_eq!(v["inputs"]["N"], 256);
    assert!(v["engine_version"].is_string());
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 2);
}

#[test]
fn failed_check_exits_two() {
    // four cells are far too coarse for the midpoint sampling to be orthogonal
    let out = fchaos(&["--experiment", "transfer-5.2", "--N", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    assert!(report(&out)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["passed"] == false));
}

#[test]
fn usage_errors_exit_one() {
    let out = fchaos(&["--experiment", "no-such-thing"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("counterexample-3.1") && err.contains("gue-crosscheck"),
        "{err}"
    );

    assert_eq!(
        fchaos(&["--experiment", "gue-crosscheck", "--trials", "1"])
            .status
            .code(),
        Some(1)
    );
    let out = fchaos(&["--experiment", "sequence-4", "--kind", "gaussian"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gaussian"));
    assert_eq!(fchaos(&[]).status.code(), Some(1));
    assert_eq!(
        fchaos(&["--experiment", "sequence-4", "--k-max", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(fchaos(&["--help"]).status.code(), Some(0));
}

#[test]
fn memory_guard_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fchaos"))
        .args(["--experiment", "counterexample-3.1"])
        .env("FCHAOS_MAX_TENSOR_ENTRIES", "4096")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4096"));
}

#[test]
fn reruns_are_bit_identical() {
    let args = [
        "--experiment",
        "freeness-battery",
        "--pairs",
        "6",
        "--depth",
        "6",
        "--seed",
        "11",
    ];
    let (a, b) = (fchaos(&args), fchaos(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(report(&a), report(&b));
    let other = fchaos(&[
        "--experiment",
        "freeness-battery",
        "--pairs",
        "6",
        "--depth",
        "6",
        "--seed",
        "12",
    ]);
    assert_ne!(
        report(&a)["values"]["rows"],
        report(&other)["values"]["rows"]
    );
}

#[test]
fn matrix_estimates_are_seeded() {
    let args = [
        "--experiment",
        "gue-crosscheck",
        "--pairs",
        "2",
        "--d",
        "60",
        "--trials",
        "3",
        "--seed",
        "5",
    ];
    assert_eq!(report(&fchaos(&args)), report(&fchaos(&args)));
}

#[test]
fn csv_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.csv");
    let out = fchaos(&[
        "--experiment",
        "sequence-4",
        "--k-max",
        "8",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.stdout.is_empty());
    assert!(matches!(out.status.code(), Some(0 | 2)));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(
        header.starts_with("kind,index,cov_squares") && header.contains("nested_norm_1"),
        "{header}"
    );
    assert_eq!(lines.count(), 3);

    let path = dir.path().join("values.csv");
    fchaos(&[
        "--experiment",
        "multivariate-6.4",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(
        text.starts_with("name,value\n") && text.contains("norm_fourth_moment_disjoint,6"),
        "{text}"
    );
}

#[test]
fn list_names_every_experiment() {
    let out = fchaos(&["--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), freechaos::EXPERIMENTS.len());
}
