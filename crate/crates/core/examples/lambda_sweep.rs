// Solve the same problem for a range of spectral parameters. Past the point
// where the linearized operator stops contracting the iteration diverges,
// which the sweep reports instead of failing.

use plap_frac::problem::ProblemSpec;
use plap_frac::solver::{lambda_sweep, Operator, SolverSettings, SweepEntry};

pub fn run_example() -> plap_frac::Result<Vec<SweepEntry>> {
    let spec = ProblemSpec::parse(1.5, 0.5, 0.0, "1+0.5*cos(t)", "0.2", 2.0, &[(1.5, "0.1", "0")])?;
    let op = Operator::new(&spec, spec.mesh(64)?)?;
    let lambdas: Vec<f64> = (0..8).map(|i| 0.05 * i as f64).collect();
    lambda_sweep(&op, &lambdas, &SolverSettings { max_iter: 300, ..Default::default() })
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    for row in run_example()? {
        println!(
            "lambda {:>5.2}  {:<14} iterations {:>4}  |y| {:.4e}",
            row.lambda,
            format!("{:?}", row.status),
            row.iterations,
            row.pc_norm
        );
    }
    Ok(())
}
