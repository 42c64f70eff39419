//! Problem data and the a-priori bound constants of the existence theorem.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, DEFAULT_BOUND_SAMPLES};
use crate::frac_ops::{gamma, rl_integral_grid, FractionalOrder};
use crate::grid::{GridFunction, Mesh};
use crate::p_laplacian::{conjugate, ExponentPair};

/// One impulse point with its value and slope jump maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Impulse {
    pub t: f64,
    /// `I_k(y)`: jump of `y`.
    pub value_jump: Expr,
    /// `I_k^*(y)`: jump of `y′`.
    pub slope_jump: Expr,
}

impl Impulse {
    pub fn parse(t: f64, value_jump: &str, slope_jump: &str) -> Result<Impulse> {
        Ok(Impulse {
            t,
            value_jump: Expr::parse(value_jump, "y")?,
            slope_jump: Expr::parse(slope_jump, "y")?,
        })
    }
}

/// Data of the boundary value problem
/// `-D^β φ_p(ᶜD^α y) + (2λ p(t) + q(t)) y = 0` on `[0, π]` with impulses and
/// the Robin conditions `y + y′ = 0` at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub p_coef: Expr,
    pub q_coef: Expr,
    pub plap_p: f64,
    pub impulses: Vec<Impulse>,
    pub interval_end: f64,
}

impl ProblemSpec {
    /// Builds and validates a problem over `[0, π]`.
    pub fn new(
        alpha: f64,
        beta: f64,
        lambda: f64,
        p_coef: Expr,
        q_coef: Expr,
        plap_p: f64,
        impulses: Vec<Impulse>,
    ) -> Result<ProblemSpec> {
        let spec = ProblemSpec { alpha, beta, lambda, p_coef, q_coef, plap_p, impulses, interval_end: PI };
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor from expression strings.
    pub fn parse(
        alpha: f64,
        beta: f64,
        lambda: f64,
        p_coef: &str,
        q_coef: &str,
        plap_p: f64,
        impulses: &[(f64, &str, &str)],
    ) -> Result<ProblemSpec> {
        let impulses = impulses.iter().map(|&(t, i, s)| Impulse::parse(t, i, s)).collect::<Result<_>>()?;
        ProblemSpec::new(
            alpha,
            beta,
            lambda,
            Expr::parse(p_coef, "t")?,
            Expr::parse(q_coef, "t")?,
            plap_p,
            impulses,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(Error::validation("alpha", format!("must lie in (1, 2], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::validation("beta", format!("must lie in (0, 1], got {}", self.beta)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::validation("lambda", "must be finite"));
        }
        ExponentPair::new(self.plap_p)?;
        if self.p_coef.variable() != "t" || self.q_coef.variable() != "t" {
            return Err(Error::validation("p_coef", "coefficients must be expressions in t"));
        }
        let mut previous = 0.0;
        for (k, imp) in self.impulses.iter().enumerate() {
            if !(imp.t.is_finite() && imp.t > 0.0 && imp.t < self.interval_end) {
                return Err(Error::validation(
                    format!("impulses[{k}].t"),
                    format!("impulse point {} is outside (0, {})", imp.t, self.interval_end),
                ));
            }
            if imp.t <= previous {
                return Err(Error::validation(
                    format!("impulses[{k}].t"),
                    "impulse points must be strictly increasing",
                ));
            }
            previous = imp.t;
        }
        Ok(())
    }

    pub fn impulse_points(&self) -> Vec<f64> {
        self.impulses.iter().map(|i| i.t).collect()
    }

    pub fn mesh(&self, nodes_per_subinterval: usize) -> Result<Arc<Mesh>> {
        Mesh::new(self.interval_end, &self.impulse_points(), nodes_per_subinterval).map(Arc::new)
    }

    pub fn exponents(&self) -> ExponentPair {
        ExponentPair::new(self.plap_p).expect("validated")
    }

    /// `2λ p(t) + q(t)`.
    pub fn coefficient(&self, t: f64) -> Result<f64> {
        let p = self.p_coef.eval(t)?;
        let q = self.q_coef.eval(t)?;
        Ok(2.0 * self.lambda * p + q)
    }

    /// The coefficient sampled on `mesh`.
    pub fn coefficient_grid(&self, mesh: &Arc<Mesh>) -> Result<GridFunction> {
        let values = mesh
            .pieces()
            .iter()
            .map(|piece| piece.iter().map(|&t| self.coefficient(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        GridFunction::from_values(Arc::clone(mesh), values)
    }

    pub fn with_lambda(&self, lambda: f64) -> ProblemSpec {
        ProblemSpec { lambda, ..self.clone() }
    }
}

/// Constants of the hypotheses and the resulting bound `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `|λ| ≤ N`.
    #[serde(rename = "N")]
    pub n_lambda: f64,
    /// `|p(t)| ≤ R`.
    #[serde(rename = "R")]
    pub r_p: f64,
    /// `|q(t)| ≤ M`.
    #[serde(rename = "M")]
    pub m_q: f64,
    /// `|I_k(y)| ≤ r1` on the ball.
    pub r1: f64,
    /// `|I_k^*(y)| ≤ r2` on the ball.
    pub r2: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `ν(2NR + M) π^β / Γ(β + 1)`, the closed-form alternative to `K`.
    pub k_coarse: f64,
    pub nu: f64,
    pub delta: f64,
    pub impulse_count: usize,
    pub hypotheses_hold: bool,
}

/// Hypothesis constants `N, R, M, r1, r2` for the ball of radius `nu`.
/// `K` and `δ` are left at zero; see [`bound_report`].
pub fn check_hypotheses(spec: &ProblemSpec, nu: f64) -> Result<BoundReport> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::precondition(format!("ball radius nu must be positive, got {nu}")));
    }
    let samples = DEFAULT_BOUND_SAMPLES;
    let n_lambda = spec.lambda.abs();
    let r_p = spec.p_coef.bound_on_interval(0.0, spec.interval_end, samples)?;
    let m_q = spec.q_coef.bound_on_interval(0.0, spec.interval_end, samples)?;
    let mut r1 = 0.0_f64;
    let mut r2 = 0.0_f64;
    for imp in &spec.impulses {
        r1 = r1.max(imp.value_jump.bound_on_interval(-nu, nu, samples)?);
        r2 = r2.max(imp.slope_jump.bound_on_interval(-nu, nu, samples)?);
    }
    let hypotheses_hold = [n_lambda, r_p, m_q, r1, r2].iter().all(|v| v.is_finite());
    Ok(BoundReport {
        n_lambda,
        r_p,
        m_q,
        r1,
        r2,
        k: 0.0,
        k_coarse: 0.0,
        nu,
        delta: 0.0,
        impulse_count: spec.impulses.len(),
        hypotheses_hold,
    })
}

/// `K = sup_t I^β(|2λp + q| ν)(t)`, a bound on `|I^β (2λp + q) y|` over the
/// ball `‖y‖ ≤ ν`.
pub fn estimate_k(spec: &ProblemSpec, nu: f64, mesh: &Arc<Mesh>) -> Result<f64> {
    if nu == 0.0 {
        return Ok(0.0);
    }
    let weight = spec.coefficient_grid(mesh)?.map(|c| c.abs() * nu);
    let beta = FractionalOrder::new(spec.beta)?;
    Ok(rl_integral_grid(beta, &weight).pc_norm())
}

/// The a-priori bound `δ` on `‖T(y)‖` over the ball, for `n` impulses and
/// p-Laplacian exponent `plap_p`.
pub fn schaefer_delta(k: f64, plap_p: f64, alpha: f64, n: usize, r1: f64, r2: f64) -> Result<f64> {
    let q = conjugate(plap_p)?;
    let kq = if k == 0.0 { 0.0 } else { k.powf(q - 1.0) };
    let n = n as f64;
    let ga = gamma(alpha);
    let ga1 = gamma(alpha + 1.0);
    let first = kq * PI.powf(alpha) * ((n + 1.0) * (PI + 1.0) / (PI * ga1) + n * (PI + 1.0) / (PI * ga));
    let second = kq * PI.powf(alpha - 1.0) * (n + 1.0) / (ga * PI);
    let third = n * (PI + 1.0) * (r1 + r2) / PI;
    Ok(first + second + third)
}

/// Full report: hypothesis constants, `K` on `mesh`, and `δ`.
pub fn bound_report(spec: &ProblemSpec, nu: f64, mesh: &Arc<Mesh>) -> Result<BoundReport> {
    let mut report = check_hypotheses(spec, nu)?;
    report.k = estimate_k(spec, nu, mesh)?;
    report.k_coarse =
        nu * (2.0 * report.n_lambda * report.r_p + report.m_q) * spec.interval_end.powf(spec.beta)
            / gamma(spec.beta + 1.0);
    report.delta =
        schaefer_delta(report.k, spec.plap_p, spec.alpha, spec.impulses.len(), report.r1, report.r2)?;
    report.hypotheses_hold &= report.k.is_finite() && report.delta.is_finite();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validation() {
        assert!(ProblemSpec::parse(1.0, 0.5, 0.0, "0", "1", 2.0, &[]).is_err());
        assert!(ProblemSpec::parse(2.5, 0.5, 0.0, "0", "1", 2.0, &[]).is_err());
        assert!(ProblemSpec::parse(1.5, 0.0, 0.0, "0", "1", 2.0, &[]).is_err());
        assert!(ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1", 1.0, &[]).is_err());
        assert!(ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1", 2.0, &[(4.0, "0", "0")]).is_err());
        assert!(
            ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1", 2.0, &[(2.0, "0", "0"), (1.0, "0", "0")]).is_err()
        );
        assert!(ProblemSpec::parse(1.5, 0.5, 0.0, "0", "y", 2.0, &[]).is_err());
        assert!(ProblemSpec::parse(2.0, 1.0, 0.0, "0", "1", 2.0, &[(1.0, "y", "0")]).is_ok());
    }

    #[test]
    fn hypotheses_trivial() {
        let spec = ProblemSpec::parse(1.5, 0.5, 0.0, "0", "0", 2.0, &[]).unwrap();
        let r = check_hypotheses(&spec, 1.0).unwrap();
        assert_eq!((r.n_lambda, r.r_p, r.m_q, r.r1, r.r2), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(r.hypotheses_hold);
        assert!(check_hypotheses(&spec, 0.0).is_err());
    }

    #[test]
    fn hypotheses_sampled() {
        let spec = ProblemSpec::parse(1.5, 0.5, 1.0, "sin(t)", "1", 2.0, &[(1.0, "y/2", "0")]).unwrap();
        let r = check_hypotheses(&spec, 2.0).unwrap();
        assert_eq!(r.n_lambda, 1.0);
        assert!((r.r_p - 1.0).abs() < 1e-6);
        assert_eq!(r.m_q, 1.0);
        assert_eq!(r.r1, 1.0);
        assert_eq!(r.r2, 0.0);
    }

    #[test]
    fn hypotheses_propagate_eval_errors() {
        let spec = ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1/(t-1)", 2.0, &[]).unwrap();
        // the sampling grid on [0, π] does not hit t = 1 exactly, so the bound
        // is huge but finite; on [0, 2] it would hit the pole
        let q = &spec.q_coef;
        assert!(matches!(q.bound_on_interval(0.0, 2.0, 1025), Err(Error::Eval(_))));
        let spec = ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1/t", 2.0, &[]).unwrap();
        assert!(matches!(check_hypotheses(&spec, 1.0), Err(Error::Eval(_))));
    }

    #[test]
    fn scale_consistency() {
        let a = ProblemSpec::parse(1.5, 0.5, 0.3, "cos(t)", "1+sin(t)^2", 2.0, &[]).unwrap();
        let b = ProblemSpec::parse(1.5, 0.5, 0.3, "cos(t)", "2*(1+sin(t)^2)", 2.0, &[]).unwrap();
        let ra = check_hypotheses(&a, 1.0).unwrap();
        let rb = check_hypotheses(&b, 1.0).unwrap();
        assert_eq!(rb.m_q, 2.0 * ra.m_q);
    }

    #[test]
    fn k_examples() {
        let spec = ProblemSpec::parse(1.5, 1.0, 0.0, "0", "1", 2.0, &[]).unwrap();
        let mesh = spec.mesh(64).unwrap();
        assert_eq!(estimate_k(&spec, 0.0, &mesh).unwrap(), 0.0);
        assert_relative_eq!(estimate_k(&spec, 1.0, &mesh).unwrap(), PI, max_relative = 1e-13);

        let spec = ProblemSpec::parse(1.5, 0.5, 0.0, "0", "1", 2.0, &[]).unwrap();
        let k = estimate_k(&spec, 1.0, &mesh).unwrap();
        // I^{1/2} 1 at π is π^{1/2}/Γ(3/2) = 2
        assert_relative_eq!(k, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(schaefer_delta(0.0, 2.0, 1.5, 0, 0.0, 0.0).unwrap(), 0.0);
        // frozen from a 50-digit evaluation of the same expression
        let d = schaefer_delta(1.0, 2.0, 2.0, 1, 1.0, 1.0).unwrap();
        assert_relative_eq!(d, 30.659_013_881_725_885, max_relative = 1e-12);
        let d = schaefer_delta(1.0, 2.0, 2.0, 0, 0.0, 0.0).unwrap();
        assert_relative_eq!(d, 7.505_598_527_339_576, max_relative = 1e-12);
    }

    #[test]
    fn delta_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let k = rng.gen_range(0.0..5.0);
            let p = rng.gen_range(1.1..4.0);
            let a = rng.gen_range(1.01..=2.0);
            let n = rng.gen_range(0..5usize);
            let r1 = rng.gen_range(0.0..3.0);
            let r2 = rng.gen_range(0.0..3.0);
            let base = schaefer_delta(k, p, a, n, r1, r2).unwrap();
            assert!(schaefer_delta(k + 0.5, p, a, n, r1, r2).unwrap() >= base);
            assert!(schaefer_delta(k, p, a, n + 1, r1, r2).unwrap() >= base);
            assert!(schaefer_delta(k, p, a, n, r1 + 0.5, r2).unwrap() >= base);
            assert!(schaefer_delta(k, p, a, n, r1, r2 + 0.5).unwrap() >= base);
        }
    }
}
