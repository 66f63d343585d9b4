use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ltmle_core::families::FamilySpec;
use ltmle_core::mle::fit_mle;
use serde_json::Value;
use tempfile::TempDir;

fn ltmle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltmle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const EXP_FAMILY: &str = r#"
[family]
name = "exponential_rate"
lower = 0.1
upper = 10.0
"#;

#[test]
fn fit_reports_the_in_process_estimate() {
    let dir = TempDir::new().unwrap();
    let xs = [0.3, 1.7, 0.2, 0.9, 2.4, 0.05, 1.1, 0.6];
    let body: String = xs.iter().map(|x| format!("{x}\n")).collect();
    write(dir.path(), "x.txt", &body);
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{EXP_FAMILY}\n[data]\nfile = \"x.txt\"\n"),
    );
    let out = ltmle(&["fit", "--config", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    let spec = FamilySpec::ExponentialRate {
        space: ltmle_core::families::ParameterSpace::new(0.1, 10.0).unwrap(),
    };
    let want = fit_mle(spec.build().unwrap().as_ref(), &xs).unwrap();
    assert_eq!(
        v["result"]["mle"]["theta_hat"].as_f64().unwrap(),
        want.theta_hat
    );
    assert_eq!(v["schema_version"], 1);
    assert!(v["result"]["robust"].is_null());
}

#[test]
fn output_round_trips_through_json() {
    let cfg = repo_root().join("configs/pareto_fit.toml");
    let out = ltmle(&["fit", "--robust", "--config", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
    let r = &v["result"]["robust"];
    let (lo, hi) = (
        r["interval"][0].as_f64().unwrap(),
        r["interval"][1].as_f64().unwrap(),
    );
    let h = r["half_width"].as_f64().unwrap();
    assert!(((hi - lo) / 2.0 - h).abs() < 1e-12);
    assert!(r["theta_hat"].as_f64().unwrap() > 1.0);
}

#[test]
fn stdout_is_independent_of_workers_and_repeatable() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sim.toml",
        r#"
[run]
seed = 77
[family]
name = "pareto_shape"
x_min = 1.0
lower = 1.0
upper = 2.0
[estimator]
kind = "truncated"
delta = 0.1
[experiment]
kind = "deviation"
theta_star = 1.5
n = 300
trials = 200
"#,
    );
    let c = cfg.to_str().unwrap();
    let one = ltmle(&["simulate", "--config", c, "--workers", "1"]);
    let four = ltmle(&["simulate", "--config", c, "--workers", "4"]);
    let again = ltmle(&["simulate", "--config", c, "--workers", "4"]);
    stdout_json(&one);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
    let reseeded = ltmle(&["simulate", "--config", c, "--seed", "78"]);
    assert_ne!(one.stdout, reseeded.stdout);
}

#[test]
fn delta_above_half_is_rejected_for_the_truncated_estimator() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{EXP_FAMILY}\n[data]\ntheta = 1\nn = 50\n[estimator]\nkind = \"truncated\"\ndelta = 0.7\n"),
    );
    let out = ltmle(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("δ ∈ (0,1/2)"));
}

#[test]
fn missing_data_file_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{EXP_FAMILY}\n[data]\nfile = \"absent.txt\"\n"),
    );
    let out = ltmle(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));
}

#[test]
fn nan_in_data_exits_2() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "x.txt", "0.5\nNaN\n1.0\n");
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{EXP_FAMILY}\n[data]\nfile = \"x.txt\"\n"),
    );
    let out = ltmle(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn infeasible_tuning_exits_1_with_the_condition() {
    let dir = TempDir::new().unwrap();
    // 2 log(1/0.05) ≈ 5.99, so n = 5 admits no β.
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("{EXP_FAMILY}\n[tune]\ntheta = 1.0\nn = 5\n[estimator]\ndelta = 0.05\n"),
    );
    let out = ltmle(&["tune", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("must exceed 2 log(1/δ)"), "{err}");
}

#[test]
fn out_dir_receives_json_and_curves() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "tail.toml",
        "[experiment]\nkind = \"tail_sum\"\nlaw = \"gaussian\"\nn = 10\ntrials = 2000\n",
    );
    let out_dir = dir.path().join("out");
    let out = ltmle(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    stdout_json(&out);
    let saved = std::fs::read(out_dir.join("simulate.json")).unwrap();
    assert_eq!(saved, out.stdout);
    let csv = std::fs::read_to_string(out_dir.join("tail.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,bound,empirical,se"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn bounds_curve_never_undercuts_the_simulated_tail() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        r#"
[run]
seed = 3
[family]
name = "gaussian_mean"
sigma = 1.0
lower = -3.0
upper = 3.0
[bounds]
theta_star = 0.5
n = 40
trials = 3000
x_lower = -6.0
x_upper = 6.0
"#,
    );
    let out_dir = dir.path().join("b");
    let out = ltmle(&[
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["regime"], "theta2");
    for p in v["result"]["curve"].as_array().unwrap() {
        let (e, se, b) = (
            p["empirical"].as_f64().unwrap(),
            p["se"].as_f64().unwrap(),
            p["bound"].as_f64().unwrap(),
        );
        assert!(e - 3.0 * se <= b, "{p}");
    }
    assert!(out_dir.join("bounds.csv").is_file());
}

#[test]
fn every_shipped_config_parses_and_runs() {
    let dir = repo_root().join("configs");
    let runs = [
        ("pareto_fit.toml", "fit"),
        ("exp_tune.toml", "tune"),
        ("exp_bounds.toml", "bounds"),
        ("pareto_coverage.toml", "simulate"),
        ("laplace_tail.toml", "simulate"),
    ];
    for (file, cmd) in runs {
        let out = ltmle(&[cmd, "--config", dir.join(file).to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{file}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn reference_page_is_current() {
    let out = ltmle(&["reference"]);
    let page = std::fs::read(repo_root().join("docs/config-reference.md")).unwrap();
    assert_eq!(
        out.stdout, page,
        "regenerate with `ltmle reference > docs/config-reference.md`"
    );
}

#[test]
fn missing_config_flag_exits_1() {
    let out = ltmle(&["fit"]);
    assert_eq!(out.status.code(), Some(1));
}
