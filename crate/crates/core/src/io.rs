//! Configuration files, solution tables, reports and plots.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{GridFunction, Mesh, Side};
use crate::problem::{BoundReport, Impulse, ProblemSpec};
use crate::solver::{Mode, SolveResult, SolveStatus, SolverSettings, TCoefficients};

pub const DEFAULT_NODES_PER_SUBINTERVAL: usize = 256;
/// Upper limit on stored samples; the integral weights are dense.
pub const MAX_SAMPLES: usize = 4096;
pub const MAX_IMPULSES: usize = 64;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: f64,
    beta: f64,
    lambda: f64,
    p_lap: f64,
    p_coef: String,
    q_coef: String,
    #[serde(default)]
    impulses: Vec<RawImpulse>,
    #[serde(default)]
    mesh: RawMesh,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpulse {
    t: f64,
    #[serde(rename = "I")]
    value_jump: String,
    #[serde(rename = "I_star")]
    slope_jump: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    nodes_per_subinterval: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    mode: Option<Mode>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    damping: Option<f64>,
    nu: Option<f64>,
    theta: Option<f64>,
}

/// A validated configuration file.
#[derive(Debug, Clone)]
pub struct Config {
    pub spec: ProblemSpec,
    pub nodes_per_subinterval: usize,
    pub settings: SolverSettings,
    /// Ball radius for the bound; `None` picks a default from the solution.
    pub nu: Option<f64>,
}

impl Config {
    pub fn mesh(&self) -> Result<Arc<Mesh>> {
        self.spec.mesh(self.nodes_per_subinterval)
    }

    /// Checks the solver and mesh fields, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if !(s.tol.is_finite() && s.tol > 0.0) {
            return Err(Error::validation("solver.tol", format!("must be positive, got {}", s.tol)));
        }
        if s.max_iter < 1 {
            return Err(Error::validation("solver.max_iter", "must be at least 1"));
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(Error::validation(
                "solver.damping",
                format!("must lie in (0, 1], got {}", s.damping),
            ));
        }
        if !(s.theta > 0.0 && s.theta <= 1.0) {
            return Err(Error::validation("solver.theta", format!("must lie in (0, 1], got {}", s.theta)));
        }
        if let Some(nu) = self.nu {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::validation("solver.nu", format!("must be positive, got {nu}")));
            }
        }
        if self.spec.impulses.len() > MAX_IMPULSES {
            return Err(Error::validation(
                "impulses",
                format!("at most {MAX_IMPULSES} impulses are supported"),
            ));
        }
        let m = self.nodes_per_subinterval;
        let pieces = self.spec.impulses.len() + 1;
        if m < crate::grid::MIN_NODES_PER_SUBINTERVAL
            || pieces.saturating_mul(m.saturating_add(1)) > MAX_SAMPLES
        {
            return Err(Error::validation(
                "mesh.nodes_per_subinterval",
                format!(
                    "must be at least {} and give at most {MAX_SAMPLES} samples, got {m}",
                    crate::grid::MIN_NODES_PER_SUBINTERVAL
                ),
            ));
        }
        Ok(())
    }
}

fn expr_field(source: &str, variable: &str, field: &str) -> Result<Expr> {
    Expr::parse(source, variable).map_err(|e| match e {
        Error::Parse { offset, message } => Error::Parse { offset, message: format!("{field}: {message}") },
        other => other,
    })
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = serde_json::from_str(text)?;
    let impulses = raw
        .impulses
        .iter()
        .enumerate()
        .map(|(k, imp)| {
            Ok(Impulse {
                t: imp.t,
                value_jump: expr_field(&imp.value_jump, "y", &format!("impulses[{k}].I"))?,
                slope_jump: expr_field(&imp.slope_jump, "y", &format!("impulses[{k}].I_star"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = ProblemSpec::new(
        raw.alpha,
        raw.beta,
        raw.lambda,
        expr_field(&raw.p_coef, "t", "p_coef")?,
        expr_field(&raw.q_coef, "t", "q_coef")?,
        raw.p_lap,
        impulses,
    )?;
    let d = SolverSettings::default();
    let s = raw.solver;
    let config = Config {
        spec,
        nodes_per_subinterval: raw.mesh.nodes_per_subinterval.unwrap_or(DEFAULT_NODES_PER_SUBINTERVAL),
        settings: SolverSettings {
            mode: s.mode.unwrap_or(d.mode),
            tol: s.tol.unwrap_or(d.tol),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            damping: s.damping.unwrap_or(d.damping),
            theta: s.theta.unwrap_or(d.theta),
        },
        nu: s.nu,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_config(&text)
}

/// Writes `t,side,y,yprime` rows, one per stored sample, with 17
/// significant digits.
pub fn write_solution_csv<W: Write>(writer: W, y: &GridFunction) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["t", "side", "y", "yprime"])?;
    let derivative = y.derivative_values();
    for (node, t, side, v) in y.samples() {
        let d = derivative.map_or(f64::NAN, |d| d[node.piece][node.index]);
        out.write_record([
            format!("{t:.16e}"),
            side.as_char().to_string(),
            format!("{v:.16e}"),
            format!("{d:.16e}"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_solution_csv(path: impl AsRef<Path>, y: &GridFunction) -> Result<()> {
    write_solution_csv(std::io::BufWriter::new(std::fs::File::create(path)?), y)
}

/// Reads a table written by [`write_solution_csv`] back onto `mesh`,
/// checking that rows, node positions and side labels line up.
pub fn read_solution_csv<R: Read>(reader: R, mesh: &Arc<Mesh>) -> Result<GridFunction> {
    let mut input = csv::Reader::from_reader(reader);
    let headers = input.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "side", "y", "yprime"] {
        return Err(Error::validation("solution", "expected header t,side,y,yprime"));
    }
    let mut records = input.records();
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(mesh.piece_count());
    let mut slopes: Vec<Vec<f64>> = Vec::with_capacity(mesh.piece_count());
    for (node, t, side) in mesh.samples() {
        let row = records
            .next()
            .ok_or_else(|| Error::validation("solution", format!("table ends before sample t = {t}")))??;
        let field = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::validation("solution", format!("bad number in row for t = {t}")))
        };
        let rt = field(0)?;
        if (rt - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::validation("solution", format!("row t = {rt} does not match mesh node {t}")));
        }
        let rs = row.get(1).and_then(|s| s.chars().next()).and_then(Side::from_char);
        if rs != Some(side) {
            return Err(Error::validation("solution", format!("side label mismatch at t = {t}")));
        }
        if node.index == 0 {
            values.push(Vec::with_capacity(mesh.nodes_per_subinterval() + 1));
            slopes.push(Vec::with_capacity(mesh.nodes_per_subinterval() + 1));
        }
        values[node.piece].push(field(2)?);
        slopes[node.piece].push(field(3)?);
    }
    if records.next().is_some() {
        return Err(Error::validation("solution", "table has more rows than the mesh has samples"));
    }
    GridFunction::from_values(Arc::clone(mesh), values)?.with_derivative(slopes)
}

pub fn load_solution_csv(path: impl AsRef<Path>, mesh: &Arc<Mesh>) -> Result<GridFunction> {
    read_solution_csv(std::io::BufReader::new(std::fs::File::open(path)?), mesh)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshInfo {
    pub interval_end: f64,
    pub impulse_points: Vec<f64>,
    pub nodes_per_subinterval: usize,
    pub sample_count: usize,
}

impl MeshInfo {
    pub fn of(mesh: &Mesh) -> MeshInfo {
        MeshInfo {
            interval_end: mesh.interval_end(),
            impulse_points: mesh.impulse_points().to_vec(),
            nodes_per_subinterval: mesh.nodes_per_subinterval(),
            sample_count: mesh.sample_count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpResidual {
    pub k: usize,
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub scale: f64,
    pub jumps: Vec<JumpResidual>,
    pub bc: [f64; 2],
    pub ode_identity: f64,
    pub ode_direct_interior: f64,
    pub ode_direct_endpoint: f64,
    pub fixed_point_defect: f64,
    /// `‖T_published(y) − T_rederived(y)‖`.
    pub mode_discrepancy: f64,
    pub within_delta: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub converged: bool,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub theta: f64,
    pub coefficients: TCoefficients,
    pub history: Vec<f64>,
}

impl SolveSummary {
    pub fn of(r: &SolveResult) -> SolveSummary {
        SolveSummary {
            status: r.status,
            converged: r.converged,
            iterations: r.iterations,
            final_update_norm: r.final_update_norm,
            theta: r.theta,
            coefficients: r.coefficients,
            history: r.history.clone(),
        }
    }
}

/// Everything the `solve` and `verify` commands record.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub settings: SolverSettings,
    pub mesh: MeshInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    pub pc_norm: f64,
    pub residuals: Residuals,
    pub bound: BoundReport,
    pub wall_time_seconds: f64,
}

pub fn write_json<T: Serialize, W: Write>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_json(std::io::BufWriter::new(std::fs::File::create(path)?), value)
}

/// Static SVG of `y`: one polyline per smooth piece, impulse points marked
/// with dashed lines and the one-sided limits with circles.
pub fn render_svg(y: &GridFunction) -> String {
    const W: f64 = 800.0;
    const H: f64 = 420.0;
    const PAD: f64 = 48.0;
    let mesh = y.mesh();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, _, _, v) in y.samples() {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let end = mesh.interval_end();
    let px = |t: f64| PAD + (W - 2.0 * PAD) * t / end;
    let py = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(svg, r##"<text x="{PAD}" y="{}" font-size="12" fill="#444">0</text>"##, H - PAD + 16.0);
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" font-size="12" fill="#444">{end:.4}</text>"##,
        W - PAD - 30.0,
        H - PAD + 16.0
    );
    let _ = writeln!(svg, r##"<text x="4" y="{}" font-size="12" fill="#444">{hi:.4e}</text>"##, PAD + 4.0);
    let _ = writeln!(svg, r##"<text x="4" y="{}" font-size="12" fill="#444">{lo:.4e}</text>"##, H - PAD);
    for &t in mesh.impulse_points() {
        let x = px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.3}" y1="{PAD}" x2="{x:.3}" y2="{}" stroke="#c33" stroke-dasharray="4 3"/>"##,
            H - PAD
        );
    }
    for k in 0..mesh.piece_count() {
        let points: Vec<String> = mesh
            .piece(k)
            .iter()
            .zip(y.piece_values(k))
            .filter(|(_, v)| v.is_finite())
            .map(|(&t, &v)| format!("{:.3},{:.3}", px(t), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="#1f57a4" stroke-width="1.5" points="{}"/>"##,
            points.join(" ")
        );
    }
    for k in 1..mesh.piece_count() {
        let t = mesh.piece_start(k);
        for (v, fill) in [
            (y.piece_values(k - 1)[mesh.nodes_per_subinterval()], "white"),
            (y.piece_values(k)[0], "#1f57a4"),
        ] {
            if v.is_finite() {
                let _ = writeln!(
                    svg,
                    r##"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{fill}" stroke="#1f57a4"/>"##,
                    px(t),
                    py(v)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(path: impl AsRef<Path>, y: &GridFunction) -> Result<()> {
    std::fs::write(path, render_svg(y))?;
    Ok(())
}
