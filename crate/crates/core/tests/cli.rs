//! End-to-end tests of the `dualqp` binary: exit codes, report text, JSON and
//! CSV side outputs, and input diagnostics.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dualqp_core::report::{ClaimStatus, RunReport};

fn dualqp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualqp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn example1_golden_run_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(&["reproduce-example1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("critical-set"));
    assert!(text.contains("REFUTED"));
    assert!(text.contains("negdef-local-min"));
    assert!(text.contains("CONFIRMED"));
    assert!(text.contains("all ok"));
    assert!(text.contains("input digest"));
}

#[test]
fn example1_curve_and_json_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(
        &[
            "reproduce-example1",
            "--curve",
            "curve.csv",
            "--samples",
            "629",
            "--json",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let curve = fs::read(dir.path().join("curve.csv")).unwrap();
    assert!(!curve.contains(&b'\r'), "curve CSV must be LF-only");
    let curve = String::from_utf8(curve).unwrap();
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines.len(), 630, "header plus one row per sample");
    for line in &lines[1..] {
        let (t, v) = line.split_once(',').expect("two columns");
        let t: f64 = t.parse().unwrap();
        let v: f64 = v.parse().unwrap();
        assert!(t > -std::f64::consts::PI && t <= std::f64::consts::PI + 1e-15);
        assert!(v.is_finite());
    }
    let (t_last, _) = lines.last().unwrap().split_once(',').unwrap();
    assert!((t_last.parse::<f64>().unwrap() - std::f64::consts::PI).abs() <= 1e-15);

    let report: RunReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report.all_ok());
    assert_eq!(report.input_digest.len(), 64);
    assert!(report.input_digest.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(report.verdicts.iter().any(|v| v.claim_id == "critical-set"));

    // The digest is a pure function of the problem payload: a second run
    // must reproduce it bit for bit.
    let again = dualqp(&["reproduce-example1", "--json", "again.json"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    let report2: RunReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("again.json")).unwrap())
            .unwrap();
    assert_eq!(report.input_digest, report2.input_digest);
}

#[test]
fn example1_lambda_override_is_flagged_non_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(&["reproduce-example1", "--lambda", "0.4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("NON-GOLDEN"));
    assert!(!text.contains("critical-set"), "golden assertions must be skipped");
}

#[test]
fn example2_golden_run_reports_frozen_perturbations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(&["reproduce-example2", "--json", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: RunReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report.all_ok());
    let primal = report
        .verdicts
        .iter()
        .find(|v| v.claim_id == "perturbation-primal")
        .unwrap();
    assert!((primal.values["excess_over_critical"] - 2.251953125).abs() <= 1e-10);
    let global = report
        .verdicts
        .iter()
        .find(|v| v.claim_id == "box-global-min")
        .unwrap();
    assert_eq!(global.status, ClaimStatus::Confirmed);
}

#[test]
fn binary_verify_writes_pair_table_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("instance.json");
    fs::write(
        &path,
        r#"{"family":"binary","payload":{"q":[[-6.0]],"f":[-1.0]}}"#,
    )
    .unwrap();
    let out = dualqp(
        &[
            "binary-verify",
            "--file",
            "instance.json",
            "--csv",
            "pairs.csv",
            "--json",
            "doc.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(dir.path().join("pairs.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "x_star,sigma_1,branch,dual_value,primal_value,residual"
    );
    assert_eq!(lines.len(), 3, "one row per binary point");

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("doc.json")).unwrap()).unwrap();
    assert!(doc["report"]["verdicts"].is_array());
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 2);
    assert!(!doc["certificates"].as_array().unwrap().is_empty());
    let branches: Vec<&str> = doc["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["branch"].as_str().unwrap())
        .collect();
    assert!(branches.contains(&"SharpMinus"));
    assert!(branches.contains(&"SharpPlus"));
}

#[test]
fn schema_violation_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        "{\n  \"family\": \"binary\",\n  \"payload\": {\"q\": [[2.0]], \"f\": [3.0], \"extra\": 1}\n}",
    )
    .unwrap();
    let out = dualqp(&["binary-verify", "--file", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3"), "stderr: {err}");
    assert!(err.contains("extra"), "stderr: {err}");
}

#[test]
fn family_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("qc.json"),
        r#"{"family":"qc","payload":{"a":[[-2.0,-1.0],[-1.0,-3.0]],"c":[[1.0,0.0],[0.0,1.0]],"f":[-1.0,-1.0],"lambda":0.5}}"#,
    )
    .unwrap();
    let out = dualqp(&["binary-verify", "--file", "qc.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expected family"));
}

#[test]
fn oversized_instance_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let n = 25;
    let q = vec![vec![0.0f64; n]; n];
    let payload = serde_json::json!({
        "family": "binary",
        "payload": {"q": q, "f": vec![0.0f64; n]},
    });
    fs::write(dir.path().join("big.json"), payload.to_string()).unwrap();
    let out = dualqp(&["binary-verify", "--file", "big.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("instance too large"));
}

#[test]
fn missing_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(&["binary-verify", "--file", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reports_zero_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(
        &[
            "binary-verify",
            "--sweep",
            "--seeds",
            "10",
            "--n",
            "3",
            "--samples",
            "500",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("corrected-pairing-sweep"));
    assert!(text.contains("failures=0"));
}

#[test]
fn fd_check_passes_for_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        (
            "qc.json",
            r#"{"family":"qc","payload":{"a":[[-2.0,-1.0],[-1.0,-3.0]],"c":[[1.0,0.0],[0.0,1.0]],"f":[-1.0,-1.0],"lambda":0.5}}"#,
        ),
        (
            "box.json",
            r#"{"family":"box","payload":{"a":[[-4.0,0.0],[0.0,-4.0]],"b":[[1.0,0.0],[0.0,1.0]],"c":[-2.0,-2.0],"alpha":3.0,"ell":[4.0,4.0]}}"#,
        ),
        (
            "binary.json",
            r#"{"family":"binary","payload":{"q":[[2.0,0.5],[0.5,1.0]],"f":[0.5,-1.5]}}"#,
        ),
    ];
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
        let out = dualqp(&["fd-check", "--file", name], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name} stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("all ok"), "{name}");
    }
}

#[test]
fn no_arguments_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualqp(&[], dir.path());
    assert_eq!(out.status.code(), Some(2), "clap usage error");
    assert!(stderr(&out).contains("Usage"));
}
