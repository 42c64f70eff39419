// Hypothesis constants and the a-priori bound for a problem, and the
// homotopy family `y = θ T(y)` checked against it.

use std::sync::Arc;

use plap_frac::problem::{bound_report, BoundReport, ProblemSpec};
use plap_frac::solver::{homotopy_bound_check, HomotopyEntry, Operator, SolverSettings};

#[derive(Debug)]
pub struct BoundSummary {
    pub report: BoundReport,
    pub rows: Vec<HomotopyEntry>,
}

pub fn run_example() -> plap_frac::Result<BoundSummary> {
    let spec = ProblemSpec::parse(
        1.5,
        0.5,
        0.1,
        "sin(t)",
        "1",
        2.0,
        &[(1.0, "0.1*y+0.05", "0"), (2.0, "0.1*y+0.05", "0")],
    )?;
    let mesh = spec.mesh(128)?;
    let report = bound_report(&spec, 2.0, &mesh)?;
    let op = Operator::new(&spec, Arc::clone(&mesh))?;
    let thetas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let settings = SolverSettings { max_iter: 500, ..Default::default() };
    let (_, rows) = homotopy_bound_check(&op, &thetas, 2.0, &settings)?;
    Ok(BoundSummary { report, rows })
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    let s = run_example()?;
    let r = &s.report;
    println!("N = {}, R = {:.6}, M = {}, r1 = {:.6}, r2 = {}", r.n_lambda, r.r_p, r.m_q, r.r1, r.r2);
    println!("K = {:.6} (coarse {:.6}), delta = {:.6}", r.k, r.k_coarse, r.delta);
    println!("{:>6} {:>12} {:>10} {:>6}", "theta", "|y|", "converged", "bound");
    for row in &s.rows {
        println!("{:>6.2} {:>12.4e} {:>10} {:>6}", row.theta, row.pc_norm, row.converged, row.within_bound);
    }
    Ok(())
}
