//! The fixed-point operator `T` of the integral representation and the damped
//! Picard iteration for `y = θ T(y)`.
//!
//! On the piece `(t_k, t_{k+1}]` the operator reads
//!
//! ```text
//! T(y)(t) = ∫_{t_k}^t (t-s)^{α-1}/Γ(α) g(s) ds
//!         + Σ_{i≤k} ∫_{t_{i-1}}^{t_i} [(t-t_i)(t_i-s)^{α-2}/Γ(α-1) + (t_i-s)^{α-1}/Γ(α)] g(s) ds
//!         + b0 + b1 t + Σ_{i≤k} [I_i(y(t_i)) + I_i^*(y(t_i)) (t - t_i)]
//! g       = φ_q(I_{0+}^β [(2λp + q) y])
//! ```
//!
//! and `(b0, b1)` come either from solving the two Robin conditions for the
//! assembled candidate ([`Mode::Rederived`]) or from the closed-form constants
//! as originally printed ([`Mode::AsPublished`]).

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_ops::{FractionalOrder, IntegralOperator, LowerLimit};
use crate::grid::{GridFunction, Mesh};
use crate::p_laplacian::ExponentPair;
use crate::problem::{bound_report, BoundReport, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed-form boundary constants exactly as printed in the source derivation.
    AsPublished,
    /// Boundary constants from solving the 2×2 Robin system numerically.
    #[default]
    Rederived,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "as_published" | "as-published" | "published" => Ok(Mode::AsPublished),
            "rederived" => Ok(Mode::Rederived),
            other => Err(Error::validation("mode", format!("unknown mode '{other}'"))),
        }
    }
}

/// The affine constants `b0 + b1 t` of the first piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub mode: Mode,
}

/// Iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub mode: Mode,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub theta: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { mode: Mode::Rederived, tol: 1e-10, max_iter: 500, damping: 0.5, theta: 1.0 }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::precondition(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::precondition("max_iter must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::precondition(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        check_theta(self.theta)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::precondition(format!("theta must lie in (0, 1], got {theta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Last iterate, with `y′` samples. After divergence this is the last
    /// finite iterate.
    pub solution: GridFunction,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub converged: bool,
    pub status: SolveStatus,
    /// `‖y_{n+1} - y_n‖` for every iteration.
    pub history: Vec<f64>,
    pub theta: f64,
    pub coefficients: TCoefficients,
}

/// Precomputed operator `T` for one problem on one mesh.
///
/// The product-integration weights depend only on the mesh and the orders, so
/// they are built once and shared between iterations (and between problems
/// that differ only in their coefficients, see [`Operator::with_spec`]).
#[derive(Debug, Clone)]
pub struct Operator {
    spec: ProblemSpec,
    mesh: Arc<Mesh>,
    coefficient: GridFunction,
    exponents: ExponentPair,
    inner: Arc<IntegralOperator>,
    local_value: Arc<IntegralOperator>,
    local_slope: Arc<IntegralOperator>,
}

/// Pieces of `T(y)` that do not depend on the boundary constants.
#[derive(Debug, Clone)]
struct Candidate {
    /// Value part without `b0 + b1 t`.
    values: Vec<Vec<f64>>,
    /// Slope part without `b1`.
    slopes: Vec<Vec<f64>>,
    /// `∫_{t_{i-1}}^{t_i} (t_i-s)^{α-1}/Γ(α) g` per impulse.
    hist_value: Vec<f64>,
    /// `∫_{t_{i-1}}^{t_i} (t_i-s)^{α-2}/Γ(α-1) g` per impulse.
    hist_slope: Vec<f64>,
    value_jumps: Vec<f64>,
    slope_jumps: Vec<f64>,
    /// Local terms on the last piece, evaluated at the right end.
    tail_value: f64,
    tail_slope: f64,
}

impl Operator {
    pub fn new(spec: &ProblemSpec, mesh: Arc<Mesh>) -> Result<Operator> {
        spec.validate()?;
        if mesh.impulse_points() != spec.impulse_points().as_slice()
            || mesh.interval_end() != spec.interval_end
        {
            return Err(Error::validation("mesh", "mesh does not match the problem's impulse points"));
        }
        let alpha = spec.alpha;
        let inner =
            IntegralOperator::new(Arc::clone(&mesh), FractionalOrder::new(spec.beta)?, LowerLimit::Origin);
        let local_value =
            IntegralOperator::new(Arc::clone(&mesh), FractionalOrder::new(alpha)?, LowerLimit::PieceStart);
        let local_slope = IntegralOperator::new(
            Arc::clone(&mesh),
            FractionalOrder::new(alpha - 1.0)?,
            LowerLimit::PieceStart,
        );
        Ok(Operator {
            coefficient: spec.coefficient_grid(&mesh)?,
            exponents: spec.exponents(),
            spec: spec.clone(),
            mesh,
            inner: Arc::new(inner),
            local_value: Arc::new(local_value),
            local_slope: Arc::new(local_slope),
        })
    }

    /// Same mesh and orders, different coefficients or impulse maps.
    pub fn with_spec(&self, spec: &ProblemSpec) -> Result<Operator> {
        spec.validate()?;
        if spec.alpha != self.spec.alpha
            || spec.beta != self.spec.beta
            || spec.impulse_points() != self.spec.impulse_points()
        {
            return Operator::new(spec, Arc::clone(&self.mesh));
        }
        Ok(Operator {
            coefficient: spec.coefficient_grid(&self.mesh)?,
            exponents: spec.exponents(),
            spec: spec.clone(),
            ..self.clone()
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// `2λp + q` on the mesh.
    pub fn coefficient(&self) -> &GridFunction {
        &self.coefficient
    }

    /// `I_{0+}^β [(2λp + q) y]`.
    pub fn inner_integral(&self, y: &GridFunction) -> GridFunction {
        let weighted = self.coefficient.zip_with(y, |c, v| c * v).without_derivative();
        self.inner.apply(&weighted)
    }

    /// `g = φ_q(I_{0+}^β [(2λp + q) y])`, the field shared by every term of `T`.
    pub fn inner_field(&self, y: &GridFunction) -> GridFunction {
        let pair = self.exponents;
        self.inner_integral(y).map(|v| pair.phi_inverse(v))
    }

    fn candidate(&self, y: &GridFunction) -> Result<Candidate> {
        let g = self.inner_field(y);
        let local = self.local_value.apply(&g);
        let slope = self.local_slope.apply(&g);
        let mesh = &self.mesh;
        let m = mesh.nodes_per_subinterval();
        let n = mesh.impulse_count();

        let mut hist_value = Vec::with_capacity(n);
        let mut hist_slope = Vec::with_capacity(n);
        let mut value_jumps = Vec::with_capacity(n);
        let mut slope_jumps = Vec::with_capacity(n);
        for (i, imp) in self.spec.impulses.iter().enumerate() {
            hist_value.push(local.piece_values(i)[m]);
            hist_slope.push(slope.piece_values(i)[m]);
            let before = y.left_limit(i + 1)?;
            value_jumps.push(imp.value_jump.eval(before)?);
            slope_jumps.push(imp.slope_jump.eval(before)?);
        }

        let points = mesh.impulse_points();
        let mut values = Vec::with_capacity(mesh.piece_count());
        let mut slopes = Vec::with_capacity(mesh.piece_count());
        for k in 0..mesh.piece_count() {
            let nodes = mesh.piece(k);
            let lv = local.piece_values(k);
            let ls = slope.piece_values(k);
            let mut pv = Vec::with_capacity(m + 1);
            let mut ps = Vec::with_capacity(m + 1);
            for j in 0..=m {
                let t = nodes[j];
                let mut v = lv[j];
                let mut s = ls[j];
                // causal history: only impulses t_i < t contribute
                for i in 0..k {
                    let dt = t - points[i];
                    v += dt * hist_slope[i] + hist_value[i] + value_jumps[i] + slope_jumps[i] * dt;
                    s += hist_slope[i] + slope_jumps[i];
                }
                pv.push(v);
                ps.push(s);
            }
            values.push(pv);
            slopes.push(ps);
        }
        let last = mesh.piece_count() - 1;
        Ok(Candidate {
            values,
            slopes,
            hist_value,
            hist_slope,
            value_jumps,
            slope_jumps,
            tail_value: local.piece_values(last)[m],
            tail_slope: slope.piece_values(last)[m],
        })
    }

    fn constants(&self, c: &Candidate, mode: Mode) -> Result<TCoefficients> {
        let end = self.spec.interval_end;
        match mode {
            Mode::Rederived => {
                let m = self.mesh.nodes_per_subinterval();
                let last = self.mesh.piece_count() - 1;
                let r0 = c.values[0][0] + c.slopes[0][0];
                let r_end = c.values[last][m] + c.slopes[last][m];
                // b0 + b1 = -r0,  b0 + (L + 1) b1 = -r_end
                let det = end;
                if det.abs() < 1e-12 {
                    return Err(Error::SingularSystem(det));
                }
                let b1 = (r0 - r_end) / det;
                let b0 = -r0 - b1;
                Ok(TCoefficients { b0, b1, mode })
            }
            Mode::AsPublished => {
                let pi = end;
                let points = self.mesh.impulse_points();
                let hist: f64 = c
                    .hist_value
                    .iter()
                    .zip(&c.hist_slope)
                    .zip(points)
                    .map(|((a, b), t)| (pi - t) * b + a)
                    .sum();
                let sum_i: f64 = c.value_jumps.iter().sum();
                let sum_is: f64 = c.slope_jumps.iter().sum();
                let sum_is_w: f64 = c.slope_jumps.iter().zip(points).map(|(s, t)| s * (pi - t)).sum();
                let sum_b: f64 = c.hist_slope.iter().sum();
                let b1 = -c.tail_value / pi
                    - hist / pi
                    - (sum_i / pi - sum_is_w / pi)
                    - c.tail_slope / pi
                    - (sum_b / pi - sum_is / pi);
                let b0 = c.tail_value / pi
                    + hist / pi
                    + (sum_i / pi + sum_is_w / pi)
                    + c.tail_slope / pi
                    + (sum_b + sum_is / pi) / pi;
                Ok(TCoefficients { b0, b1, mode })
            }
        }
    }

    /// Boundary constants that `T(y)` uses in `mode`.
    pub fn assemble_constants(&self, y: &GridFunction, mode: Mode) -> Result<TCoefficients> {
        let c = self.candidate(y)?;
        self.constants(&c, mode)
    }

    /// `T(y)` with its derivative, together with the constants used.
    pub fn apply_with_constants(
        &self,
        y: &GridFunction,
        mode: Mode,
    ) -> Result<(GridFunction, TCoefficients)> {
        let c = self.candidate(y)?;
        let coef = self.constants(&c, mode)?;
        let mesh = &self.mesh;
        let mut values = c.values;
        let mut slopes = c.slopes;
        for (k, piece) in mesh.pieces().iter().enumerate() {
            for (j, &t) in piece.iter().enumerate() {
                values[k][j] += coef.b0 + coef.b1 * t;
                slopes[k][j] += coef.b1;
            }
        }
        let out = GridFunction::from_values(Arc::clone(mesh), values)?.with_derivative(slopes)?;
        Ok((out, coef))
    }

    /// `θ T(y)`.
    pub fn apply(&self, y: &GridFunction, mode: Mode, theta: f64) -> Result<GridFunction> {
        check_theta(theta)?;
        let (ty, _) = self.apply_with_constants(y, mode)?;
        Ok(if theta == 1.0 { ty } else { ty.scale(theta) })
    }

    /// `‖T_published(y) - T_rederived(y)‖`, the size of the disagreement
    /// between the two ways of fixing the boundary constants.
    pub fn mode_discrepancy(&self, y: &GridFunction) -> Result<f64> {
        let (a, _) = self.apply_with_constants(y, Mode::AsPublished)?;
        let (b, _) = self.apply_with_constants(y, Mode::Rederived)?;
        Ok(a.sub(&b).pc_norm())
    }

    /// Damped Picard iteration `y ← (1-ω) y + ω θ T(y)` from `init`.
    pub fn picard_solve(&self, init: &GridFunction, settings: &SolverSettings) -> Result<SolveResult> {
        settings.validate()?;
        let omega = settings.damping;
        let theta = settings.theta;
        let mut y = with_zero_derivative(init);
        let mut history = Vec::new();
        let mut coefficients = TCoefficients { b0: 0.0, b1: 0.0, mode: settings.mode };
        let mut status = SolveStatus::MaxIterations;
        let mut last_update = f64::INFINITY;

        for _ in 0..settings.max_iter {
            let (ty, coef) = self.apply_with_constants(&y, settings.mode)?;
            let step = if theta == 1.0 { ty } else { ty.scale(theta) };
            let next =
                if omega == 1.0 { step } else { y.zip_with(&step, |a, b| (1.0 - omega) * a + omega * b) };
            if !next.is_finite() {
                status = SolveStatus::Diverged;
                break;
            }
            let update = next.sub(&y).pc_norm();
            history.push(update);
            last_update = update;
            y = next;
            coefficients = coef;
            if !update.is_finite() {
                status = SolveStatus::Diverged;
                break;
            }
            if update <= settings.tol * y.pc_norm().max(1.0) {
                status = SolveStatus::Converged;
                break;
            }
        }

        Ok(SolveResult {
            solution: y,
            iterations: history.len(),
            final_update_norm: last_update,
            converged: status == SolveStatus::Converged,
            status,
            history,
            theta,
            coefficients,
        })
    }

    /// Picard solve from `y ≡ 0`.
    pub fn solve(&self, settings: &SolverSettings) -> Result<SolveResult> {
        self.picard_solve(&GridFunction::zeros(Arc::clone(&self.mesh)), settings)
    }
}

fn with_zero_derivative(y: &GridFunction) -> GridFunction {
    if y.has_derivative() {
        y.clone()
    } else {
        y.clone().with_derivative_fn(|_, _| 0.0)
    }
}

/// One row of the homotopy diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyEntry {
    pub theta: f64,
    pub pc_norm: f64,
    pub delta: f64,
    pub converged: bool,
    pub iterations: usize,
    pub within_bound: bool,
}

/// Solves `y = θ T(y)` for every `θ` and checks `‖y‖ ≤ δ`, where `δ` is the
/// bound for the ball of radius `nu`. Solves run in parallel; a diverging
/// `θ` is recorded, not fatal.
pub fn homotopy_bound_check(
    op: &Operator,
    thetas: &[f64],
    nu: f64,
    settings: &SolverSettings,
) -> Result<(BoundReport, Vec<HomotopyEntry>)> {
    if thetas.is_empty() {
        return Err(Error::precondition("theta list is empty"));
    }
    for &theta in thetas {
        check_theta(theta)?;
    }
    let report = bound_report(op.spec(), nu, op.mesh())?;
    let entries = thetas
        .par_iter()
        .map(|&theta| {
            let result = op.solve(&SolverSettings { theta, ..*settings })?;
            let norm = result.solution.pc_norm();
            Ok(HomotopyEntry {
                theta,
                pc_norm: norm,
                delta: report.delta,
                converged: result.converged,
                iterations: result.iterations,
                within_bound: result.converged && norm <= report.delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((report, entries))
}

/// Summary of one solve in a sweep over the spectral parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub converged: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub pc_norm: f64,
}

/// Solves the problem for each `λ` in order, reusing the mesh weights.
pub fn lambda_sweep(op: &Operator, lambdas: &[f64], settings: &SolverSettings) -> Result<Vec<SweepEntry>> {
    if lambdas.is_empty() {
        return Err(Error::precondition("lambda list is empty"));
    }
    lambdas
        .par_iter()
        .map(|&lambda| {
            let op = op.with_spec(&op.spec().with_lambda(lambda))?;
            let r = op.solve(settings)?;
            Ok(SweepEntry {
                lambda,
                converged: r.converged,
                status: r.status,
                iterations: r.iterations,
                final_update_norm: r.final_update_norm,
                pc_norm: r.solution.pc_norm(),
            })
        })
        .collect()
}
