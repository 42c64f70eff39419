// Solve one impulsive problem and check the result against the differential
// form.
//
// ```text
// cargo run --example solve_problem
// ```

use plap_frac::problem::ProblemSpec;
use plap_frac::solver::{Mode, Operator, SolverSettings};
use plap_frac::verify::{self, ResidualMode};

#[derive(Debug)]
pub struct SolveSummary {
    pub iterations: usize,
    pub converged: bool,
    pub norm: f64,
    pub max_jump_residual: f64,
    pub bc_residual: f64,
    pub identity_residual: f64,
    /// Interior direct residual for 64, 128, 256 nodes per subinterval.
    pub direct_residuals: Vec<f64>,
}

pub fn run_example() -> plap_frac::Result<SolveSummary> {
    let spec = ProblemSpec::parse(
        1.5,
        0.5,
        0.1,
        "sin(t)",
        "0.3",
        2.0,
        &[(1.0, "0.1*y+0.05", "0"), (2.0, "0.1*y+0.05", "0")],
    )?;
    let settings = SolverSettings { mode: Mode::Rederived, ..Default::default() };

    let mut direct_residuals = Vec::new();
    let mut summary = None;
    for m in [64, 128, 256] {
        let op = Operator::new(&spec, spec.mesh(m)?)?;
        let result = op.solve(&settings)?;
        let y = &result.solution;
        let r = verify::residual_ode(y, &spec, ResidualMode::Direct)?;
        direct_residuals.push(verify::interior_norm(&r));
        if m == 256 {
            let jumps = verify::residual_jumps(y, &spec)?;
            let (b0, b1) = verify::residual_bc(y)?;
            summary = Some(SolveSummary {
                iterations: result.iterations,
                converged: result.converged,
                norm: y.pc_norm(),
                max_jump_residual: jumps.iter().fold(0.0, |a, &(_, v, s)| f64::max(a, v.abs().max(s.abs()))),
                bc_residual: b0.abs().max(b1.abs()),
                identity_residual: verify::residual_ode(y, &spec, ResidualMode::Identity)?.pc_norm(),
                direct_residuals: Vec::new(),
            });
        }
    }
    let mut summary = summary.expect("finest mesh solved");
    summary.direct_residuals = direct_residuals;
    Ok(summary)
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    let s = run_example()?;
    println!("converged: {} in {} iterations, |y| = {:.6e}", s.converged, s.iterations, s.norm);
    println!("jump residual {:.2e}, boundary residual {:.2e}", s.max_jump_residual, s.bc_residual);
    println!("identity residual {:.2e}", s.identity_residual);
    for (m, r) in [64, 128, 256].iter().zip(&s.direct_residuals) {
        println!("direct residual at {m:>3} nodes: {r:.3e}");
    }
    Ok(())
}
