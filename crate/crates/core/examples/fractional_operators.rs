// Product-trapezoid fractional integrals and the derivatives built on them,
// with observed convergence orders.

use std::f64::consts::PI;
use std::sync::Arc;

use plap_frac::frac_ops::{
    caputo_derivative_grid, gamma, rl_derivative_grid, rl_integral, rl_integral_grid, FractionalOrder,
};
use plap_frac::{GridFunction, Mesh};

#[derive(Debug)]
pub struct OperatorSummary {
    /// `|I^{0.5} s^2 (1) - Γ(3)/Γ(3.5)|` for 64, 128, 256, 512 nodes.
    pub integral_errors: Vec<f64>,
    /// Caputo derivative of order 1.5 of `t^2.5` at `t = 1` minus `Γ(3.5)`, same meshes.
    pub caputo_errors: Vec<f64>,
    /// `max |D^{0.5} I^{0.5} cos - cos|`, same meshes.
    pub roundtrip_errors: Vec<f64>,
}

fn order(v: f64) -> FractionalOrder {
    FractionalOrder::new(v).expect("positive order")
}

pub fn run_example() -> plap_frac::Result<OperatorSummary> {
    let mut summary =
        OperatorSummary { integral_errors: vec![], caputo_errors: vec![], roundtrip_errors: vec![] };
    for m in [64, 128, 256, 512] {
        let mesh = Arc::new(Mesh::new(PI, &[1.0], m)?);
        let square = GridFunction::from_fn(Arc::clone(&mesh), |t| t * t);
        let exact = gamma(3.0) / gamma(3.5);
        summary.integral_errors.push((rl_integral(order(0.5), &square, 0.0, 1.0)? - exact).abs());

        let y = GridFunction::from_fn(Arc::clone(&mesh), |t| t.powf(2.5));
        let c = caputo_derivative_grid(order(1.5), &y)?;
        summary.caputo_errors.push((c.piece_values(0)[m] - gamma(3.5)).abs());

        let phi = GridFunction::from_fn(Arc::clone(&mesh), f64::cos);
        let f = rl_integral_grid(order(0.5), &phi);
        let back = rl_derivative_grid(order(0.5), &f)?;
        let err = back.samples().map(|(_, t, _, v)| (v - t.cos()).abs()).fold(0.0, f64::max);
        summary.roundtrip_errors.push(err);
    }
    Ok(summary)
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    let s = run_example()?;
    for (name, errs) in [
        ("I^0.5 s^2", &s.integral_errors),
        ("Caputo t^2.5", &s.caputo_errors),
        ("D I cos", &s.roundtrip_errors),
    ] {
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
        println!("{name:<12} errors {}", shown.join(" "));
        println!("{:<12} orders {:.2?}", "", orders(errs));
    }
    Ok(())
}
