//! Exit codes and output files of the command-line front end.

use std::fs;
use std::path::Path;

use plap_frac::cli::{self, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK};

const MILD: &str = r#"{
  "alpha": 1.5, "beta": 0.5, "lambda": 0.1, "p_lap": 2,
  "p_coef": "sin(t)", "q_coef": "0.3",
  "impulses": [{"t": 1, "I": "0.1*y+0.05", "I_star": "0"},
               {"t": 2, "I": "0.1*y+0.05", "I_star": "0"}],
  "mesh": {"nodes_per_subinterval": 48}
}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> i32 {
    let path = dir.join("problem.json");
    fs::write(&path, config).unwrap();
    let mut argv = vec!["plap-frac".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--config".into(), path.display().to_string()]);
    argv.extend(["--out".into(), dir.display().to_string()]);
    cli::run(argv)
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), MILD, &["solve", "--emit-svg"]), EXIT_OK);
    for name in ["solution.csv", "report.json", "solution.svg"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["solve"]["converged"], true);
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_expr = MILD.replace("sin(t)", "sin(t");
    let bad_field = MILD.replace("\"p_lap\": 2", "\"p_lap\": 0.5");
    let unknown = MILD.replace("\"lambda\"", "\"lamda\"");
    for config in [bad_expr.as_str(), bad_field.as_str(), unknown.as_str(), "not json"] {
        assert_eq!(run(dir.path(), config, &["solve"]), EXIT_INVALID, "{config}");
    }
    assert_eq!(run(dir.path(), MILD, &["solve", "--damping", "1.5"]), EXIT_INVALID);
    assert_eq!(run(dir.path(), MILD, &["frobnicate"]), EXIT_INVALID);
}

#[test]
fn non_convergence_exits_two_and_keeps_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = MILD.replace("\"0.3\"", "\"1\"");
    assert_eq!(run(dir.path(), &config, &["solve", "--max-iter", "40"]), EXIT_NOT_CONVERGED);
    assert!(dir.path().join("solution.csv").exists());
}

#[test]
fn homotopy_and_sweep_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), MILD, &["homotopy", "--thetas", "0.5,1"]), EXIT_OK);
    assert!(dir.path().join("homotopy.json").exists());
    assert_eq!(run(dir.path(), MILD, &["sweep", "--lambdas", "0,0.05"]), EXIT_OK);
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert_eq!(run(dir.path(), MILD, &["bound"]), EXIT_OK);
}
