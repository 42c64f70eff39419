// For `α = 2, β = 1, p = 2` the problem is an ordinary impulsive BVP; compare
// the fixed-point solution with a shooting solution and with the closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use plap_frac::problem::ProblemSpec;
use plap_frac::solver::{Mode, Operator, SolverSettings};
use plap_frac::verify::{classical_oracle, equivalence_check, EquivalenceReport};

#[derive(Debug)]
pub struct ClassicalSummary {
    /// Shooting solution minus `(1-t)/π + [t > 1]`.
    pub oracle_vs_closed_form: f64,
    pub picard_vs_oracle: f64,
    /// `‖T(y) - y‖` for the shooting solution of a problem with a potential.
    pub oracle_defect_with_potential: f64,
    pub equivalence: EquivalenceReport,
}

pub fn run_example() -> plap_frac::Result<ClassicalSummary> {
    let spec = ProblemSpec::parse(2.0, 1.0, 0.0, "0", "0", 2.0, &[(1.0, "1", "0")])?;
    let mesh = spec.mesh(512)?;
    let oracle = classical_oracle(&spec, &mesh)?;
    let closed = oracle
        .samples()
        .map(|(node, t, _, v)| (v - (1.0 - t) / PI - if node.piece == 1 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let op = Operator::new(&spec, Arc::clone(&mesh))?;
    let picard = op.solve(&SolverSettings::default())?;
    let picard_vs_oracle = picard.solution.sub(&oracle).pc_norm();

    let loaded = ProblemSpec::parse(2.0, 1.0, 0.2, "cos(t)", "0.3", 2.0, &[(1.5, "0.5-0.2*y", "0.1*y")])?;
    let mesh = loaded.mesh(256)?;
    let y = classical_oracle(&loaded, &mesh)?;
    let ty = Operator::new(&loaded, Arc::clone(&mesh))?.apply(&y, Mode::Rederived, 1.0)?;

    Ok(ClassicalSummary {
        oracle_vs_closed_form: closed,
        picard_vs_oracle,
        oracle_defect_with_potential: ty.sub(&y).pc_norm(),
        equivalence: equivalence_check(&spec, 256, &SolverSettings::default())?,
    })
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    let s = run_example()?;
    println!("oracle vs closed form   {:.3e}", s.oracle_vs_closed_form);
    println!("picard vs oracle        {:.3e}", s.picard_vs_oracle);
    println!("T(y) - y with potential {:.3e}", s.oracle_defect_with_potential);
    println!("{:#?}", s.equivalence);
    Ok(())
}
