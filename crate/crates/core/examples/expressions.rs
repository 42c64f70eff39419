// The expression language for coefficients and impulse maps, and the
// p-Laplacian map applied to parsed values.

use plap_frac::expr::Expr;
use plap_frac::p_laplacian::ExponentPair;
use plap_frac::Error;

#[derive(Debug)]
pub struct ExpressionSummary {
    pub values: Vec<(String, f64)>,
    pub errors: Vec<(String, String)>,
    pub roundtrip: f64,
}

pub fn run_example() -> plap_frac::Result<ExpressionSummary> {
    let mut values = Vec::new();
    for src in ["2*sin(t)^2 + cos(t)^2", "exp(-t/2) * tanh(3*t)", "sqrt(abs(t - pi))", "-2^2"] {
        let e = Expr::parse(src, "t")?;
        values.push((e.to_string(), e.eval(1.0)?));
    }
    let mut errors = Vec::new();
    for src in ["1+", "sin(", "2*x", "1/(t-1)"] {
        let msg = match Expr::parse(src, "t").and_then(|e| e.eval(1.0).map_err(Error::from)) {
            Ok(v) => format!("value {v}"),
            Err(e) => e.to_string(),
        };
        errors.push((src.to_string(), msg));
    }
    let pair = ExponentPair::new(3.0)?;
    let roundtrip = (-5..=5)
        .map(|i| {
            let x = i as f64 * 0.7;
            (pair.phi_inverse(pair.phi(x)) - x).abs()
        })
        .fold(0.0, f64::max);
    Ok(ExpressionSummary { values, errors, roundtrip })
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    let s = run_example()?;
    for (e, v) in &s.values {
        println!("{e:<40} at t = 1: {v:.12}");
    }
    for (src, msg) in &s.errors {
        println!("{src:<10} -> {msg}");
    }
    println!("p = 3 inverse roundtrip error {:.1e}", s.roundtrip);
    Ok(())
}
