// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fockstab::ensemble::trajectory_seed;
use fockstab::trajectory::{run_trajectory, ExperimentConfig};
use fockstab_cli::config::ConfigFile;
use fockstab_cli::format::real;

fn fockstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockstab"))
        .args(args)
        .output()
        .expect("run fockstab")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = fockstab(&["simulate", "--seed", "5", "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(
        lines[0],
        "step,true_outcome,reported_outcome,alpha,fidelity_true,fidelity_est,v_est"
    );
    assert!(lines.last().unwrap().starts_with("100,"));
}

#[test]
fn simulate_matches_the_library() {
    let out = fockstab(&["simulate", "--seed", "9", "--steps", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = ExperimentConfig {
        steps: 20,
        ..ExperimentConfig::reference()
    };
    let records = run_trajectory(&cfg, 9).unwrap();
    for (line, r) in text.lines().skip(1).zip(&records) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1], r.true_outcome.to_string());
        assert_eq!(cells[3], real(r.alpha));
        assert_eq!(cells[4], real(r.fidelity_true));
        assert_eq!(cells[6], real(r.v_est));
    }
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"steps": 7, "eta_f": 0.5, "seed": 3}"#).unwrap();
    let out = fockstab(&["simulate", "--config", path(&cfg), "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    let expected = ExperimentConfig {
        steps: 4,
        eta_f: 0.5,
        ..ExperimentConfig::reference()
    };
    let first = &run_trajectory(&expected, 3).unwrap()[0];
    let cells: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(cells[2], first.reported_outcome.to_string());
    assert_eq!(cells[4], real(first.fidelity_true));
}

#[test]
fn zero_dephasing_is_a_config_error_citing_the_phase_condition() {
    let out = fockstab(&["simulate", "--phi", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("phi"), "{msg}");
    assert!(msg.contains("mod pi/2") && msg.contains("cos^2"), "{msg}");
}

#[test]
fn unknown_and_malformed_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"n_bar": 3, "gamma": 1}"#).unwrap();
    let out = fockstab(&["simulate", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma"));

    fs::write(&cfg, r#"{"epsilon": 1.5}"#).unwrap();
    let out = fockstab(&["simulate", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon"));

    fs::write(&cfg, r#"{"n_bar": 20}"#).unwrap();
    let out = fockstab(&["ensemble", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n_bar"));
}

#[test]
fn io_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let out = fockstab(&["simulate", "--config", path(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    let unwritable = dir.path().join("no/such/dir/t.csv");
    let out = fockstab(&["simulate", "--out", path(&unwritable)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ensemble_of_one_is_the_single_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("s.csv");
    let traj = dir.path().join("t.csv");
    let seed = trajectory_seed(11, 0).to_string();
    let out = fockstab(&[
        "ensemble",
        "--trajectories",
        "1",
        "--seed",
        "11",
        "--out",
        path(&stats),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = fockstab(&["simulate", "--seed", &seed, "--out", path(&traj)]);
    assert_eq!(out.status.code(), Some(0));
    let stats = fs::read_to_string(stats).unwrap();
    let traj = fs::read_to_string(traj).unwrap();
    for (s, t) in stats.lines().skip(1).zip(traj.lines().skip(1)) {
        let s: Vec<&str> = s.split(',').collect();
        let t: Vec<&str> = t.split(',').collect();
        assert_eq!(s[1], t[4]);
        assert_eq!(s[2], "0");
        assert_eq!(s[3], t[4]);
        assert_eq!(s[5], t[4]);
    }
}

#[test]
fn ensemble_summary_echo_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    fs::write(
        &cfg_path,
        r#"{"c1": 0.0714, "filter_init": "uniform", "steps": 45}"#,
    )
    .unwrap();
    let csv = dir.path().join("s.csv");
    let summary = dir.path().join("s.json");
    let out = fockstab(&[
        "ensemble",
        "--config",
        path(&cfg_path),
        "--trajectories",
        "20",
        "--seed",
        "4",
        "--eta-f",
        "0.05",
        "--threads",
        "2",
        "--out",
        path(&csv),
        "--summary",
        path(&summary),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(json["n_traj"], 20);
    assert_eq!(json["master_seed"], 4);
    assert!(json["fidelity_at_30"].is_f64() && json["fidelity_at_40"].is_f64());
    assert!(json["fidelity_at_100"].is_null());

    let original = ConfigFile::parse(&fs::read_to_string(&cfg_path).unwrap())
        .unwrap()
        .to_experiment()
        .unwrap();
    let echoed: ConfigFile = serde_json::from_value(json["config"].clone()).unwrap();
    let echoed = echoed.to_experiment().unwrap();
    assert_eq!(
        echoed,
        ExperimentConfig {
            eta_f: 0.05,
            ..original
        }
    );

    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 46);
    let at30: Vec<&str> = rows.lines().nth(30).unwrap().split(',').collect();
    assert_eq!(at30[1], real(json["fidelity_at_30"].as_f64().unwrap()));
}

#[test]
fn verify_passes_by_default_and_fails_for_zero_dephasing() {
    let out = fockstab(&["verify", "--trials", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    for line in text.lines() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols.len(), 5, "{line}");
        assert_eq!(cols[4], "PASS");
    }
    let again = fockstab(&["verify", "--trials", "200", "--seed", "1"]);
    assert_eq!(again.stdout, out.stdout);

    let bad = fockstab(&["verify", "--trials", "20", "--phi", "0"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("phases") && l.ends_with("FAIL")));
}

#[test]
fn params_prints_a_reloadable_resolved_config() {
    let out = fockstab(&["params", "--eta-f", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let resolved = ConfigFile::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let cfg = resolved.to_experiment().unwrap();
    let reference = ExperimentConfig::<f64>::reference();
    assert_eq!(cfg.phi_r, Some(reference.resolved_phi_r()));
    assert_eq!(cfg.feedback, reference.feedback);
    assert_eq!(cfg.eta_f, 0.2);
    assert_eq!(resolved.n_traj, Some(1000));
}
