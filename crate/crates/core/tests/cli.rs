mod common;

use std::path::Path;
use std::process::{Command, Output};

use minext::cli::{RunReport, SWEEP_COLUMNS};
use minext::verifier::CHECKS;

fn minext(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minext"))
        .args(args)
        .env("MINEXT_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_report_to_default_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = minext(&["solve", path(&common::config("disc_p1.cfg"))], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("disc_p1.solve.json")).unwrap();
    let report = RunReport::from_json(&text).unwrap();
    let pi = std::f64::consts::PI;
    assert!((report.direct.as_ref().unwrap().m_p - pi).abs() <= 1e-6 * pi);
    assert!((report.irls.as_ref().unwrap().m_p - pi).abs() <= 1e-6 * pi);
    assert!(report.failures.is_empty());
    assert_eq!(report.config.solve.seed, 20240521);
}

#[test]
fn solve_csv_and_explicit_out() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested/r.csv");
    let out = minext(
        &["solve", path(&common::config("disc_weighted.cfg")), "--method", "irls", "--format", "csv", "--out", path(&target)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(target).unwrap();
    assert!(csv.starts_with("record,index,eps,value\n"));
    assert!(csv.contains("\nirls_trace,0,"));
    assert!(!csv.contains("direct_trace"));
}

#[test]
fn missing_and_corrupt_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = minext(&["solve", "/definitely/missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let text = std::fs::read_to_string(common::config("disc_p1.cfg")).unwrap().replace("p = 1.0", "p = -1");
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, text).unwrap();
    let out = minext(&["verify", path(&bad)], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solve.p"));

    let typo = dir.path().join("typo.cfg");
    std::fs::write(&typo, "[domain]\nkind = \"disc\"\nradius = 1.0\nradus = 2.0\n").unwrap();
    let out = minext(&["solve", path(&typo)], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("radus") && msg.contains("line 4"), "{msg}");

    assert_eq!(minext(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn shipped_instances_verify() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["disc_weighted.cfg", "polydisc_slice.cfg", "ball_origin.cfg", "disc_p1.cfg", "disc_points.cfg"] {
        let out = minext(&["verify", path(&common::config(name))], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let stem = name.trim_end_matches(".cfg");
        let report = RunReport::from_json(&std::fs::read_to_string(dir.path().join(format!("{stem}.verify.json"))).unwrap()).unwrap();
        assert_eq!(report.ledger.unwrap().entries.len(), CHECKS.len());
    }
}

#[test]
fn zero_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = std::fs::read_to_string(common::config("disc_weighted.cfg")).unwrap();
    text.push_str("\n[tolerances]\nnorm_transfer = 0.0\n");
    let cfg = dir.path().join("strict.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = minext(&["verify", path(&cfg)], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL  norm_transfer"));
}

#[test]
fn solver_failure_exits_3_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(common::config("disc_points.cfg")).unwrap().replace("starts = 4", "starts = 4\nmax_iter = 2");
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = minext(&["solve", path(&cfg), "--method", "direct"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = RunReport::from_json(&std::fs::read_to_string(dir.path().join("short.solve.json")).unwrap()).unwrap();
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].iterations, Some(2));
    assert!(!report.failures[0].trace.is_empty());
    let out = minext(&["verify", path(&cfg)], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config("disc_weighted.cfg");
    let out = minext(&["sweep", path(&cfg), "--p", "0.5,1,1.5", "--degrees", "4,8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("disc_weighted.sweep.csv")).unwrap();
    let golden = std::fs::read_to_string(common::golden("sweep_disc_weighted.csv")).unwrap();
    common::sweep_matches(&csv, &golden).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    for line in csv.lines().skip(1) {
        let fp: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(fp <= 1e-4);
    }

    let single = minext(&["sweep", path(&cfg), "--p", "1", "--degrees", "4", "--out", path(&dir.path().join("one.csv"))], dir.path());
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("one.csv")).unwrap().lines().count(), 2);

    assert_eq!(minext(&["sweep", path(&cfg), "--p", ""], dir.path()).status.code(), Some(2));
    assert_eq!(minext(&["sweep", path(&cfg)], dir.path()).status.code(), Some(2));
    assert_eq!(minext(&["sweep", path(&cfg), "--p", "2.0"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config("polydisc_slice.cfg");
    let mut ledgers = Vec::new();
    for k in 0..2 {
        let target = dir.path().join(format!("v{k}.json"));
        let out = minext(&["verify", path(&cfg), "--out", path(&target)], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let report = RunReport::from_json(&std::fs::read_to_string(target).unwrap()).unwrap();
        ledgers.push(serde_json::to_string(&report.ledger).unwrap());
    }
    assert_eq!(ledgers[0], ledgers[1]);
}
