//! End-to-end tests of the `flexrate` binary: exit codes, CSV output
//! contracts, and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flexrate"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn evaluate_reference_cell_office_hand() {
    let out = run(&[
        "evaluate",
        "--env",
        "office",
        "--scenario",
        "hand",
        "--distance",
        "1",
        "--mu",
        "2",
        "--tau-ms",
        "1.0",
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "environment,scenario,d_A_m,mu,tau_ms,p,zeta,eta,xi,E_S_los,E_S_nlos,rate_aggregate_mbps,rate_time_avg_mbps,recommended_flag"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "office");
    assert_eq!(row[1], "hand");
    assert_eq!(row[3], "2");
    let p: f64 = row[5].parse().unwrap();
    assert_eq!(p, 0.0);
    let zeta: f64 = row[6].parse().unwrap();
    assert!((zeta - 0.946_428_571_428_571_4).abs() < 1e-9);
    let eta: f64 = row[7].parse().unwrap();
    assert_eq!(eta, 1.0);
    let xi: u64 = row[8].parse().unwrap();
    assert_eq!(xi, 4);
}

#[test]
fn evaluate_reference_cell_car_park_pocket() {
    let out = run(&[
        "evaluate",
        "--env",
        "car_park",
        "--scenario",
        "pocket",
        "--distance",
        "10",
        "--mu",
        "4",
        "--tau-ms",
        "0.25",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let p: f64 = row[5].parse().unwrap();
    assert_eq!(p, 0.5);
    let xi: u64 = row[8].parse().unwrap();
    assert_eq!(xi, 4);
}

#[test]
fn malformed_pair_exits_2_naming_integrality() {
    let out = run(&[
        "evaluate",
        "--env",
        "office",
        "--scenario",
        "hand",
        "--distance",
        "1",
        "--mu",
        "2",
        "--tau-ms",
        "0.3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("xi"), "stderr: {err}");
    assert!(err.contains("not an integer multiple"), "stderr: {err}");
}

#[test]
fn malformed_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"tau_candidates_ms": [0.3]}"#).unwrap();
    let out = run(&["recommend", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("xi"));

    // unknown field -> schema-path diagnostic
    std::fs::write(&path, r#"{"no_such_field": 1}"#).unwrap();
    let out = run(&["recommend", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("no_such_field"));
}

#[test]
fn missing_config_file_exits_2() {
    let out = run(&["recommend", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_eta_fails_validation_with_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"efficiency": {"eta_by_mu": {"2": 1.0, "3": 1.2, "4": 0.9}}, "mc": {"trials": 10}}"#,
    )
    .unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout_str(&out);
    assert!(text.contains("eta <= 1"), "stdout: {text}");
    assert!(text.contains("FAIL"), "stdout: {text}");
}

#[test]
fn undersized_trials_skip_mc_checks_but_pass() {
    let out = run(&["validate", "--trials", "10"]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    assert!(text.contains("SKIPPED"), "stdout: {text}");
    assert!(text.contains("insufficient statistical power"));
}

#[test]
fn unreachable_quadrature_tolerance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"quadrature": {"abs_tol": 1e-300, "max_depth": 3}}"#,
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        "--config",
        path.to_str().unwrap(),
        "--env",
        "office",
        "--scenario",
        "hand",
        "--distance",
        "1",
        "--mu",
        "2",
        "--tau-ms",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_str(&out).contains("numerical"));
}

#[test]
fn sweep_grids_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let fig4 = std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    let fig5 = std::fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    // 2 env x 2 scenarios x 2 distances x 1 tau x 3 mu = 24 rows
    assert_eq!(fig4.lines().count(), 25);
    // 1 env x 2 scenarios x 2 distances x 2 tau x 3 mu = 24 rows
    assert_eq!(fig5.lines().count(), 25);
    assert!(fig4.ends_with('\n'));
    assert!(!fig4.contains('\r'));

    // sorted by (environment, scenario, d_A, tau, mu)
    let keys: Vec<(String, String, f64, f64, u8)> = fig4
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].to_string(),
                f[1].to_string(),
                f[2].parse().unwrap(),
                f[4].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .then(a.4.cmp(&b.4))
    });
    assert_eq!(keys, sorted, "fig4 rows not in deterministic sort order");

    // every (env, scenario, d, tau) group flags exactly one recommended row
    let mut flags = std::collections::BTreeMap::new();
    for line in fig4.lines().skip(1).chain(fig5.lines().skip(1)) {
        let f: Vec<&str> = line.split(',').collect();
        let key = (f[0].to_string(), f[1].to_string(), f[2].to_string(), f[4].to_string());
        *flags.entry(key).or_insert(0) += (f[13] == "true") as u32;
    }
    assert!(flags.values().all(|&c| c == 1), "flags per group: {flags:?}");
}

#[test]
fn csv_numeric_fields_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let fig4 = std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    for line in fig4.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        for idx in [2usize, 4, 5, 6, 7, 9, 10, 11, 12] {
            let v: f64 = fields[idx].parse().unwrap();
            assert_eq!(
                format!("{v:.8e}"),
                fields[idx],
                "field {idx} does not round-trip"
            );
        }
    }
}

#[test]
fn rate_mode_flag_changes_ranking() {
    let out_time = run(&["recommend", "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()]);
    assert!(out_time.status.success());
    let text_time = stdout_str(&out_time);
    assert!(text_time.contains("rate mode: time-avg"));

    let dir = tempfile::tempdir().unwrap();
    let out_agg = run(&[
        "recommend",
        "--rate-mode",
        "aggregate",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out_agg.status.success());
    let text_agg = stdout_str(&out_agg);
    assert!(text_agg.contains("rate mode: aggregate"));
    // the aggregate metric mechanically favors the largest slot count, so
    // the office cells flip away from mu=2
    assert_ne!(text_time, text_agg);
}

fn run_sweep_to(dir: &Path) -> (String, String) {
    let out = run(&["sweep", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    (
        std::fs::read_to_string(dir.join("fig4.csv")).unwrap(),
        std::fs::read_to_string(dir.join("fig5.csv")).unwrap(),
    )
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (a4, a5) = run_sweep_to(d1.path());
    let (b4, b5) = run_sweep_to(d2.path());
    assert_eq!(a4, b4);
    assert_eq!(a5, b5);
}

#[test]
fn recommend_csv_is_emitted() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["recommend", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("recommend.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9); // header + 8 cells
    assert!(csv.starts_with("environment,scenario,d_A_m,best_mu,best_tau_ms"));
}
