//! End-to-end checks of the binary: artifact layout, exit codes, and
//! rerun determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twinsplit"))
}

fn temp_root(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twinsplit-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.txt");
    let text = format!(
        "system.k_users = 3\nradio.n_ap = 3\nradio.n_irs = 4\n\
         solver.max_iter = 3\nsolver.n_rand = 12\n{extra}"
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process was signalled")
}

#[test]
fn single_run_writes_artifacts() {
    let root = temp_root("single");
    let cfg = small_config(&root, "");
    let out_dir = root.join("run");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--scheme", "descent", "--seed", "7"])
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let trace = read(&out_dir, "trace.csv");
    assert!(trace.starts_with(twinsplit::exp::TRACE_HEADER));
    assert!(trace.lines().count() >= 2);

    let alpha = read(&out_dir, "alpha.csv");
    assert_eq!(alpha.lines().count(), 1 + 3);

    let summary: serde_json::Value =
        serde_json::from_str(&read(&out_dir, "summary.json")).unwrap();
    assert_eq!(summary["scheme"], "descent");
    assert_eq!(summary["seed"], 7);
    assert!(summary["j_value"].as_f64().unwrap().is_finite());

    // config.txt reproduces the run's exact parameters
    let cfg_text = read(&out_dir, "config.txt");
    let back = twinsplit::config::parse_config(&cfg_text).unwrap();
    assert_eq!(back.k_users, 3);
    assert_eq!(back.solver.max_iter, 3);

    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn iters_flag_caps_rounds() {
    let root = temp_root("iters");
    let cfg = small_config(&root, "");
    let out_dir = root.join("run");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--iters", "1", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let trace = read(&out_dir, "trace.csv");
    // header + starting row + at most one round
    assert!(trace.lines().count() <= 3);
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn reruns_are_byte_identical() {
    let root = temp_root("determinism");
    let cfg = small_config(&root, "");
    for sub in ["a", "b"] {
        let out = bin()
            .args(["--config", cfg.to_str().unwrap(), "--seed", "5"])
            .args(["--out", root.join(sub).to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
    }
    for name in ["trace.csv", "alpha.csv", "summary.json", "config.txt"] {
        assert_eq!(
            read(&root.join("a"), name),
            read(&root.join("b"), name),
            "{name} differs"
        );
    }
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn timings_flag_records_wall_times() {
    let root = temp_root("timings");
    let cfg = small_config(&root, "");
    let out_dir = root.join("run");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--timings"])
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let trace = read(&out_dir, "trace.csv");
    let mut any_positive = false;
    for line in trace.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        for f in &fields[9..14] {
            if f.parse::<f64>().unwrap() > 0.0 {
                any_positive = true;
            }
        }
    }
    assert!(any_positive, "no step recorded any wall time");
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn unknown_scheme_exits_two() {
    let root = temp_root("badscheme");
    let out = bin()
        .args(["--scheme", "bogus", "--out", root.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn bad_config_exits_two() {
    let root = temp_root("badcfg");
    let path = root.join("broken.txt");
    std::fs::write(&path, "no.such_key = 1\n").unwrap();
    let out = bin()
        .args(["--config", path.to_str().unwrap()])
        .args(["--out", root.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    std::fs::write(&path, "system.k_users = 0\n").unwrap();
    let out = bin()
        .args(["--config", path.to_str().unwrap()])
        .args(["--out", root.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn infeasible_run_exits_three_with_artifacts() {
    let root = temp_root("infeasible");
    // Deadline far below any device's full-model time: on-device
    // execution cannot comply.
    let cfg = small_config(&root, "system.t_max_s = 1e-6\n");
    let out_dir = root.join("run");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--scheme", "local"])
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out_dir, "summary.json")).unwrap();
    assert_eq!(summary["infeasible"], true);
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn solver_failure_exits_four() {
    let root = temp_root("solverfail");
    let cfg = small_config(&root, "solver.sdp_tol = 1e-30\n");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--out", root.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn sweep_writes_tables() {
    let root = temp_root("sweep");
    let cfg = small_config(&root, "");
    let out_dir = root.join("sw");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap()])
        .args(["--sweep", "radio.p_total_w", "--values", "1,3"])
        .args(["--schemes", "descent,local", "--seeds", "2"])
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let sweep = read(&out_dir, "sweep.csv");
    assert!(sweep.starts_with(twinsplit::exp::SWEEP_HEADER));
    // 2 values x 2 seeds x 2 schemes
    assert_eq!(sweep.lines().count(), 1 + 8);

    let med = read(&out_dir, "sweep_median.csv");
    assert_eq!(med.lines().count(), 1 + 4);
    for line in med.lines().skip(1) {
        assert!(line.contains(",2,") || line.split(',').nth(3) == Some("2"));
    }
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn sweep_without_values_exits_two() {
    let root = temp_root("sweepnoval");
    let out = bin()
        .args(["--sweep", "radio.p_total_w"])
        .args(["--out", root.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn verbose_logs_progress() {
    let root = temp_root("verbose");
    let cfg = small_config(&root, "");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--verbose"])
        .args(["--out", root.join("run").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("round 0"), "stderr: {err}");
    let _ = std::fs::remove_dir_all(&root);
}
