//! End-to-end tests of the `coarsetop` binary: exit codes, report shape,
//! determinism, and the budget/refusal contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarsetop"))
}

fn write_cfg(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

const BALL_CFG: &str = r#"
task = "ball"

[group]
type = "free"
rank = 2

[ball]
radius = 2
"#;

const QUOTIENT_CFG: &str = r#"
task = "quotient"

[group]
type = "free_abelian"
rank = 2

[subgroup]
generators = ["a"]

[quotient]
radius = 6
margin = 2
"#;

#[test]
fn ball_report_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ball.toml", BALL_CFG);
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["task"], "ball");
    assert!(v["tool_version"].is_string());
    assert!(v["config_hash"].is_string());
    assert_eq!(v["payload"]["size"], 17);
    assert_eq!(
        v["payload"]["layer_sizes"],
        serde_json::json!([1, 4, 12])
    );
    assert_eq!(v["payload"]["partial"], false);
}

#[test]
fn identical_config_gives_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "quot.toml", QUOTIENT_CFG);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(
        run(&["--config", cfg_s, "--out", a.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["--config", cfg_s, "--out", b.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn csv_format_flattens_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ball.toml", BALL_CFG);
    let out = run(&["--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.lines().any(|l| l == "payload.size,17"));
    assert!(text.lines().any(|l| l.starts_with("config_hash,")));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.toml", "task = \"ball\"\n[group\n");
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "parse");
}

#[test]
fn unknown_task_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ball.toml", BALL_CFG);
    let out = run(&["--config", cfg.to_str().unwrap(), "--task", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], "parse");
    assert!(e["error"]["statement"].as_str().unwrap().contains("nonsense"));
}

#[test]
fn zero_margin_refusal_exits_3_and_names_the_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "quot0.toml",
        &QUOTIENT_CFG.replace("margin = 2", "margin = 0"),
    );
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], "refusal");
    assert_eq!(e["error"]["precondition"], "positive-certification-margin");
    assert!(e["error"]["statement"].as_str().unwrap().contains("margin"));
    assert!(out.stdout.is_empty(), "a refusal produces no report");
}

#[test]
fn positive_euler_characteristic_refusal_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "euler.toml",
        r#"
task = "euler"

[euler]
op = "report"
chi_g = "1"
chi_h = "0"

[euler.shape]
shape = "hnn"
p = 2
c_index = 1
"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["precondition"], "chi-nonpositive");
}

#[test]
fn budget_exhaustion_exits_4_and_writes_flagged_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ball.toml", BALL_CFG);
    let outfile = dir.path().join("partial.json");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--budget",
        "10",
        "--out",
        outfile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"]["kind"], "budget");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(&outfile).unwrap()).unwrap();
    assert_eq!(report["payload"]["partial"], true);
    assert_eq!(report["payload"]["requested_radius"], 2);
    assert_eq!(report["payload"]["radius"], 1);
    assert_eq!(report["payload"]["size"], 5);
    assert_eq!(report["budget"], 10);
}

#[test]
fn split_report_states_its_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "split.toml",
        r#"
task = "split-report"

[group]
type = "free_abelian"
rank = 2

[subgroup]
generators = ["a"]

[split]
quotient_radius = 9
"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let verdict = &v["payload"]["report"]["verdict"];
    assert_eq!(verdict["kind"], "splits_over_commensurable");
    assert_eq!(verdict["ends"], 2);
}

#[test]
fn almost_normality_refusal_is_a_result_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "split.toml",
        r#"
task = "split-report"

[group]
type = "free"
rank = 2

[subgroup]
generators = ["a"]
"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "a refusal verdict is a report");
    let v = stdout_json(&out);
    assert_eq!(
        v["payload"]["report"]["verdict"]["kind"],
        "refused_not_almost_normal"
    );
}

#[test]
fn task_flag_overrides_config_task() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "both.toml",
        r#"
task = "euler"

[group]
type = "free"
rank = 2

[ball]
radius = 1

[euler]
op = "hnn"
chi_a = "-1"
chi_c = "0"
"#,
    );
    let cfg_s = cfg.to_str().unwrap();
    let as_euler = run(&["--config", cfg_s]);
    assert_eq!(as_euler.status.code(), Some(0));
    assert_eq!(stdout_json(&as_euler)["payload"]["chi"], "-1");
    let as_ball = run(&["--config", cfg_s, "--task", "ball"]);
    assert_eq!(as_ball.status.code(), Some(0));
    assert_eq!(stdout_json(&as_ball)["payload"]["size"], 5);
}

#[test]
fn seed_is_recorded_and_required_for_random_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "rand.toml",
        r#"
task = "kunneth-check"

[kunneth]
mode = "random"
rings = ["Z/3"]
random_pairs = 2
"#,
    );
    let cfg_s = cfg.to_str().unwrap();
    let missing = run(&["--config", cfg_s]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr_json(&missing)["error"]["statement"]
        .as_str()
        .unwrap()
        .contains("seed"));
    let seeded = run(&["--config", cfg_s, "--seed", "42"]);
    assert_eq!(seeded.status.code(), Some(0));
    let v = stdout_json(&seeded);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["payload"]["all_pass"], true);
}

#[test]
fn atomic_writes_leave_no_stray_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ball.toml", BALL_CFG);
    let outfile = dir.path().join("report.json");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outfile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(sorted, vec!["ball.toml".to_string(), "report.json".to_string()]);
}

#[test]
fn unreadable_config_exits_2() {
    let out = run(&["--config", "/nonexistent/nope.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "parse");
}
