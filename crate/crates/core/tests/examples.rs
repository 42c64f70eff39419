macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(solve_problem, "solve_problem.rs");
example!(fractional_operators, "fractional_operators.rs");
example!(bounds, "bounds.rs");
example!(classical_limit, "classical_limit.rs");
example!(lambda_sweep, "lambda_sweep.rs");
example!(expressions, "expressions.rs");
example!(cli_pipeline, "cli_pipeline.rs");

#[test]
fn solve_problem_runs() {
    let s = solve_problem::run_example().expect("solve example should run");
    assert!(s.converged);
    let scale = s.norm.max(1.0);
    assert!(s.max_jump_residual <= 1e-8 * scale);
    assert!(s.bc_residual <= 1e-8 * scale);
    assert!(s.identity_residual <= 1e-8 * scale);
    assert!(s.direct_residuals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn fractional_operators_runs() {
    let s = fractional_operators::run_example().expect("operator example should run");
    for errs in [&s.integral_errors, &s.caputo_errors, &s.roundtrip_errors] {
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
    let ratio = s.integral_errors[2] / s.integral_errors[3];
    assert!((3.5..4.5).contains(&ratio));
}

#[test]
fn bounds_runs() {
    let s = bounds::run_example().expect("bounds example should run");
    assert!(s.report.hypotheses_hold && s.report.delta.is_finite());
    assert!(s.rows.iter().filter(|r| r.converged).all(|r| r.within_bound));
    assert!(s.rows.iter().take(5).all(|r| r.converged));
}

#[test]
fn classical_limit_runs() {
    let s = classical_limit::run_example().expect("classical example should run");
    assert!(s.oracle_vs_closed_form <= 1e-8);
    assert!(s.picard_vs_oracle <= 1e-4);
    assert!(s.oracle_defect_with_potential <= 5e-4);
    assert!(s.equivalence.converged);
}

#[test]
fn lambda_sweep_runs() {
    let rows = lambda_sweep::run_example().expect("sweep example should run");
    assert_eq!(rows.len(), 8);
    assert!(rows[0].converged);
    assert!(rows.windows(2).all(|w| w[0].lambda < w[1].lambda));
}

#[test]
fn expressions_runs() {
    let s = expressions::run_example().expect("expression example should run");
    assert_eq!(s.values.len(), 4);
    assert_eq!(s.values[3].1, -4.0);
    assert!(s.errors[0].1.contains("offset 2"));
    assert!(s.roundtrip <= 1e-12);
}

#[test]
fn cli_pipeline_runs() {
    let s = cli_pipeline::run_example().expect("pipeline example should run");
    assert_eq!((s.solve_exit, s.verify_exit, s.tampered_exit), (0, 0, 3));
    assert!(s.files.iter().any(|f| f == "solution.svg"));
}
