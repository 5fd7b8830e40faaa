use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_supercyclic"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn diag_grid_passes_with_vertical_worst_probe() {
    let cfg = scenario("diag_grid_sc.json");
    let (code, out, _) = run(&["check", "sc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "PASS");
    let worst = report["worst_case"].as_f64().unwrap();
    // (0,1) is reached best through the corner |w|² = 200 of the grid.
    assert!((worst - 1.0 / 201f64.sqrt()).abs() < 1e-12, "{worst}");
    assert_eq!(report["witnesses"][0]["index"], 1);
}

#[test]
fn identity_fails_with_exit_code_one() {
    let cfg = scenario("identity_sc.json");
    let (code, out, _) = run(&["check", "sc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "FAIL");
    assert_eq!(report["worst_case"].as_f64(), Some(1.0));
}

#[test]
fn shipped_scenarios_and_reports_match_the_schemas() {
    let config_schema = jsonschema::validator_for(&schema("scenario.schema.json")).unwrap();
    let report_schema = jsonschema::validator_for(&schema("report.schema.json")).unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let config: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(config_schema.is_valid(&config), "{}", path.display());
        let test = config["test"].as_str().unwrap();
        let (code, out, err) = run(&["check", test, "--config", path.to_str().unwrap()]);
        assert!(code <= 1, "{}: {err}", path.display());
        let report: Value = serde_json::from_str(&out).unwrap();
        assert!(report_schema.is_valid(&report), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 6);
}

#[test]
fn output_is_deterministic_apart_from_wall_time() {
    let cfg = scenario("diag_grid_sc.json");
    let strip = |s: String| {
        let mut v: Value = serde_json::from_str(&s).unwrap();
        v["wall_time_ms"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    let a = run(&["check", "sc", "--config", cfg.to_str().unwrap(), "--seed", "11"]).1;
    let b = run(&["check", "sc", "--config", cfg.to_str().unwrap(), "--seed", "11"]).1;
    let c = run(&["check", "sc", "--config", cfg.to_str().unwrap(), "--seed", "12"]).1;
    assert_eq!(strip(a.clone()), strip(b));
    assert_ne!(strip(a), strip(c));
}

#[test]
fn csv_plot_writes_header_and_rows_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plot.csv");
    let cfg = scenario("identity_sc.json");
    let (code, stdout, _) = run(&[
        "check",
        "sc",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv-plot",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    let csv = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "probe,min_distance,member");
    assert_eq!(lines.len(), 501);
}

#[test]
fn flags_override_budget_and_eps() {
    let cfg = scenario("diag_grid_sc.json");
    let (code, out, _) = run(&[
        "check", "sc", "--config", cfg.to_str().unwrap(), "--eps", "0.01", "--budget", "5000",
    ]);
    assert_eq!(code, 1);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["budget"], 5000);
    assert_eq!(report["metrics"]["eps_density"].as_f64(), Some(0.01));
    assert_eq!(report["metrics"]["members_used"].as_f64(), Some(5000.0));
}

#[test]
fn malformed_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let non_square = write_config(
        &dir,
        "non_square.json",
        r#"{"family": {"kind": "finite_list", "members": [[[[1,0],[0,0]]]]}, "vector": [[1,0],[0,0]]}"#,
    );
    let (code, out, err) = run(&["check", "sc", "--config", non_square.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("error"));

    let wrong_test = write_config(
        &dir,
        "wrong_test.json",
        r#"{"test": "strict", "family": {"kind": "identity", "dim": 2}}"#,
    );
    assert_eq!(run(&["check", "sc", "--config", wrong_test.to_str().unwrap()]).0, 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["check", "sc", "--config", missing.to_str().unwrap()]).0, 2);
}

#[test]
fn numerical_failure_reports_error_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let zero_vector = write_config(
        &dir,
        "zero.json",
        r#"{"family": {"kind": "identity", "dim": 2}, "vector": [[0,0],[0,0]], "probes": {"count": 4}}"#,
    );
    let (code, out, _) = run(&["check", "sc", "--config", zero_vector.to_str().unwrap()]);
    assert_eq!(code, 3);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "ERROR");
    assert!(report["error"].as_str().unwrap().contains("zero"));
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let group = r#""kind": "regularized_group_grid",
        "generator": [[[0,1],[0,0]], [[0,0],[0,-1]]],
        "regularizer": [[[1,0],[0,0]], [[0,0],[1,0]]],
        "z_grid": {"r_min": 0.5, "r_max": 4.0, "n_moduli": 6, "n_args": 24}"#;
    let group_config = format!(r#"{{"family": {{{group}}}, "vector": [[1,0],[1,0]]}}"#);
    let tail_config = format!(
        r#"{{"family": {{{group}}}, "vector": [[1,0],[1,0]], "omega0": 1.0, "probes": {{"count": 20}}}}"#
    );
    let cases = [
        ("sc", r#"{"family": {"kind": "diag_grid", "half_width": 2.0, "step": 0.5}, "vector": [[1,0],[1,0]], "probes": {"count": 20}}"#),
        ("transitive", r#"{"family": {"kind": "diag_grid", "half_width": 2.0, "step": 0.5}, "random_pairs": 3, "w_radius": 0.5}"#),
        ("strict", r#"{"family": {"kind": "identity", "dim": 2}, "random_pairs": 2}"#),
        ("supertransitive", r#"{"family": {"kind": "identity", "dim": 2}, "random_vectors": 3, "probes": {"count": 8}}"#),
        ("gdelta", r#"{"family": {"kind": "identity", "dim": 2}, "vector": [[1,0],[0,0]], "probes": {"count": 8}}"#),
        ("criterion", r#"{"criterion": {"source": "rolewicz", "dim": 8, "lambda": [2,0]}}"#),
        ("semigroup", r#"{"family": {"kind": "semigroup_grid", "generator": [[[0,0],[1,0]], [[-1,0],[0,0]]], "step": 0.1, "count": 5}}"#),
        ("group", group_config.as_str()),
        ("tail", tail_config.as_str()),
    ];
    for (test, text) in cases {
        let path = write_config(&dir, &format!("{test}.json"), text);
        let (code, out, err) = run(&["check", test, "--config", path.to_str().unwrap()]);
        assert!(code <= 1, "{test}: exit {code}: {err}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["test"], test);
    }
}
