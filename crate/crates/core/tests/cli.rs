//! The `mvsde` binary: subcommands, outputs and exit codes.

use std::fs;
use std::process::{Command, Output};

use mvsde::experiments::{read_results, EXPERIMENTS};

fn mvsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvsde")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_experiments_names_every_experiment() {
    let out = mvsde(&["list-experiments"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in EXPERIMENTS {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn validate_accepts_minimal_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "[experiment]\nname = \"uniqueness\"\n").unwrap();
    let out = mvsde(&["validate", "--config", good.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("uniqueness"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[experiment]\nname = \"uniqueness\"\n[grid]\nstep = 0.1\n").unwrap();
    let out = mvsde(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn missing_config_and_bad_grid_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = mvsde(&["run", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("grid.toml");
    fs::write(&cfg, "[experiment]\nname = \"uniqueness\"\n[grid]\ndt = 0.03\n").unwrap();
    let out = mvsde(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid."));
}

#[test]
fn run_writes_results_manifest_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("u.toml");
    fs::write(
        &cfg,
        "[experiment]\nname = \"uniqueness\"\npaths = 8\n[output]\ntrajectories = 2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = mvsde(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_results(&out_dir.join("results.jsonl")).unwrap();
    assert!(records.iter().any(|r| r.metric == "max_sup_distance" && r.passed));
    assert!(fs::read_to_string(out_dir.join("manifest.toml"))
        .unwrap()
        .contains("paths = 8"));
    let timing: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("timings.json")).unwrap()).unwrap();
    assert_eq!(timing["experiment"], "uniqueness");
    assert!(fs::read_dir(out_dir.join("trajectories")).unwrap().count() >= 1);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("r.toml");
    fs::write(&cfg, "[experiment]\nname = \"reflected_bm_oracle\"\npaths = 500\n").unwrap();
    let run = |seed: &str, name: &str| {
        let d = dir.path().join(name);
        mvsde(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        fs::read(d.join("results.jsonl")).unwrap()
    };
    assert_eq!(run("1", "a"), run("1", "b"));
    assert_ne!(run("1", "a"), run("2", "c"));
}

#[test]
fn failing_check_exits_with_1() {
    // a tolerance of zero on a Monte Carlo mean cannot hold
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("r.toml");
    fs::write(
        &cfg,
        "[experiment]\nname = \"reflected_bm_oracle\"\npaths = 200\n[tolerance]\nse_multiplier = 0.0\nbias_dt = 0.0\n",
    )
    .unwrap();
    let out = mvsde(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}
