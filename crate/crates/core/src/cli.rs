//! Command-line front end. The binary only forwards `argv` to [`run`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::io::{self, Config, JumpResidual, MeshInfo, Report, Residuals, SolveSummary};
use crate::problem::{bound_report, ProblemSpec};
use crate::solver::{homotopy_bound_check, lambda_sweep, Mode, Operator};
use crate::verify::{self, ResidualMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Residual tolerance relative to `max(1, ‖y‖)` used by `verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "plap-frac", version, about = "Impulsive fractional p-Laplacian Sturm-Liouville solver")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON problem configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Boundary constants: rederived or as_published.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    damping: Option<f64>,
    /// Nodes per subinterval.
    #[arg(long, global = true)]
    mesh: Option<usize>,
    /// Ball radius for the a-priori bound.
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Also write solution.svg.
    #[arg(long = "emit-svg", global = true)]
    emit_svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve and write solution.csv and report.json.
    Solve,
    /// Re-check a stored solution table.
    Verify {
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Print the hypothesis constants and the bound.
    Bound,
    /// Solve y = θT(y) for several θ and compare against the bound.
    Homotopy {
        /// Comma-separated θ values in (0, 1].
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
    },
    /// Solve for several λ and write sweep.csv.
    Sweep {
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
    },
}

enum Failure {
    Error(Error),
    NotConverged(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularSystem(_) | Error::Shooting(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_INVALID,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code. Diagnostics go to stderr, tables to stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Error(e)) => {
            eprintln!("error[{}]: {e}", e.kind());
            exit_code(&e)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("not converged: {msg}");
            EXIT_NOT_CONVERGED
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            EXIT_VERIFY_FAILED
        }
    }
}

fn load(global: &Global) -> Result<Config> {
    let path = global.config.as_ref().ok_or_else(|| Error::validation("config", "--config is required"))?;
    let mut config = io::load_config(path)?;
    let s = &mut config.settings;
    if let Some(mode) = global.mode {
        s.mode = mode;
    }
    if let Some(tol) = global.tol {
        s.tol = tol;
    }
    if let Some(max_iter) = global.max_iter {
        s.max_iter = max_iter;
    }
    if let Some(damping) = global.damping {
        s.damping = damping;
    }
    if let Some(m) = global.mesh {
        config.nodes_per_subinterval = m;
    }
    if global.nu.is_some() {
        config.nu = global.nu;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    let g = &cli.global;
    let config = load(g)?;
    match &cli.command {
        Command::Solve => solve(g, &config),
        Command::Verify { solution } => {
            let path = solution.clone().unwrap_or_else(|| g.out.join("solution.csv"));
            verify_stored(g, &config, &path)
        }
        Command::Bound => {
            let mesh = config.mesh()?;
            let report = bound_report(&config.spec, config.nu.unwrap_or(1.0), &mesh)?;
            print_json(&report)?;
            Ok(())
        }
        Command::Homotopy { thetas } => homotopy(g, &config, thetas.as_deref()),
        Command::Sweep { lambdas } => sweep(g, &config, lambdas),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    io::write_json(std::io::stdout().lock(), value)
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Default ball radius: large enough to contain `y`.
pub fn default_nu(y: &GridFunction) -> f64 {
    (2.0 * y.pc_norm()).max(1.0)
}

/// Residuals and bound check of `y` against `spec`.
pub fn assess(
    spec: &ProblemSpec,
    op: &Operator,
    y: &GridFunction,
    mode: Mode,
    nu: f64,
) -> Result<(Residuals, crate::problem::BoundReport)> {
    let scale = verify::scale(y);
    let jumps = verify::residual_jumps(y, spec)?
        .into_iter()
        .map(|(k, value, slope)| JumpResidual { k, value, slope })
        .collect();
    let (b0, b1) = verify::residual_bc(y)?;
    let direct = verify::residual_ode(y, spec, ResidualMode::Direct)?;
    let identity = verify::residual_ode(y, spec, ResidualMode::Identity)?;
    let ty = op.apply(y, mode, 1.0)?;
    let bound = bound_report(spec, nu, op.mesh())?;
    let residuals = Residuals {
        scale,
        jumps,
        bc: [b0, b1],
        ode_identity: identity.pc_norm(),
        ode_direct_interior: verify::interior_norm(&direct),
        ode_direct_endpoint: verify::endpoint_norm(&direct),
        fixed_point_defect: ty.sub(y).pc_norm(),
        mode_discrepancy: op.mode_discrepancy(y)?,
        within_delta: verify::check_delta_bound(y, &bound),
    };
    Ok((residuals, bound))
}

/// Reasons a solution fails the checks, empty when it passes.
// negated comparisons so that NaN counts as a failure
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn verification_failures(r: &Residuals, mode: Mode, tol: f64) -> Vec<String> {
    let limit = VERIFY_TOL * r.scale;
    let mut failures = Vec::new();
    for j in &r.jumps {
        if !(j.value.abs() <= limit && j.slope.abs() <= limit) {
            failures.push(format!("jump residual at impulse {}: ({:e}, {:e})", j.k, j.value, j.slope));
        }
    }
    if mode == Mode::Rederived && !(r.bc[0].abs() <= limit && r.bc[1].abs() <= limit) {
        failures.push(format!("boundary residual ({:e}, {:e})", r.bc[0], r.bc[1]));
    }
    if !(r.ode_identity <= limit) {
        failures.push(format!("identity ODE residual {:e}", r.ode_identity));
    }
    if !(r.fixed_point_defect <= 10.0 * tol * r.scale) {
        failures.push(format!("fixed-point defect {:e}", r.fixed_point_defect));
    }
    if !r.within_delta {
        failures.push("solution exceeds the a-priori bound".to_string());
    }
    failures
}

fn solve(g: &Global, config: &Config) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let mesh = config.mesh()?;
    let op = Operator::new(&config.spec, Arc::clone(&mesh))?;
    let result = op.solve(&config.settings)?;
    let y = &result.solution;
    let nu = config.nu.unwrap_or_else(|| default_nu(y));
    let (residuals, bound) = assess(&config.spec, &op, y, config.settings.mode, nu)?;
    ensure_out(&g.out)?;
    io::save_solution_csv(g.out.join("solution.csv"), y)?;
    if g.emit_svg {
        io::emit_svg(g.out.join("solution.svg"), y)?;
    }
    let report = Report {
        mode: config.settings.mode,
        settings: config.settings,
        mesh: MeshInfo::of(&mesh),
        solve: Some(SolveSummary::of(&result)),
        pc_norm: y.pc_norm(),
        residuals,
        bound,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    io::save_json(g.out.join("report.json"), &report)?;
    println!(
        "{:?} after {} iterations, update {:.3e}, |y| = {:.6e}",
        result.status,
        result.iterations,
        result.final_update_norm,
        y.pc_norm()
    );
    if result.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "{:?} after {} iterations (last update {:e})",
            result.status, result.iterations, result.final_update_norm
        )))
    }
}

fn verify_stored(g: &Global, config: &Config, path: &Path) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let mesh = config.mesh()?;
    let y = io::load_solution_csv(path, &mesh)?;
    if !y.is_finite() {
        return Err(Failure::Verification("solution contains non-finite samples".into()));
    }
    let op = Operator::new(&config.spec, Arc::clone(&mesh))?;
    let mode = config.settings.mode;
    let nu = config.nu.unwrap_or_else(|| default_nu(&y));
    let (residuals, bound) = assess(&config.spec, &op, &y, mode, nu)?;
    let failures = verification_failures(&residuals, mode, config.settings.tol);
    let report = Report {
        mode,
        settings: config.settings,
        mesh: MeshInfo::of(&mesh),
        solve: None,
        pc_norm: y.pc_norm(),
        residuals,
        bound,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    ensure_out(&g.out)?;
    io::save_json(g.out.join("verify.json"), &report)?;
    if failures.is_empty() {
        println!("verification passed ({} samples)", mesh.sample_count());
        Ok(())
    } else {
        Err(Failure::Verification(failures.join("; ")))
    }
}

/// Default homotopy parameters `0.1, 0.2, …, 1.0`.
pub fn default_thetas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

fn homotopy(g: &Global, config: &Config, thetas: Option<&[f64]>) -> std::result::Result<(), Failure> {
    let thetas = thetas.map(<[f64]>::to_vec).unwrap_or_else(default_thetas);
    let mesh = config.mesh()?;
    let op = Operator::new(&config.spec, mesh)?;
    let nu = config.nu.unwrap_or(1.0);
    let (bound, rows) = homotopy_bound_check(&op, &thetas, nu, &config.settings)?;
    println!("{:>8} {:>14} {:>14} {:>10} {:>6}", "theta", "pc_norm", "delta", "converged", "bound");
    for r in &rows {
        println!(
            "{:>8.3} {:>14.6e} {:>14.6e} {:>10} {:>6}",
            r.theta, r.pc_norm, r.delta, r.converged, r.within_bound
        );
    }
    ensure_out(&g.out)?;
    #[derive(Serialize)]
    struct Table<'a> {
        bound: &'a crate::problem::BoundReport,
        rows: &'a [crate::solver::HomotopyEntry],
    }
    io::save_json(g.out.join("homotopy.json"), &Table { bound: &bound, rows: &rows })?;
    if rows.iter().any(|r| r.converged && !r.within_bound) {
        return Err(Failure::Verification("a converged solution exceeds the bound".into()));
    }
    Ok(())
}

fn sweep(g: &Global, config: &Config, lambdas: &[f64]) -> std::result::Result<(), Failure> {
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
        return Err(Error::validation("lambdas", format!("must be finite, got {bad}")).into());
    }
    let mesh = config.mesh()?;
    let op = Operator::new(&config.spec, mesh)?;
    let rows = lambda_sweep(&op, lambdas, &config.settings)?;
    ensure_out(&g.out)?;
    let mut out = csv::Writer::from_path(g.out.join("sweep.csv")).map_err(Error::from)?;
    out.write_record(["lambda", "status", "iterations", "final_update_norm", "pc_norm"])
        .map_err(Error::from)?;
    for r in &rows {
        out.write_record([
            format!("{:.16e}", r.lambda),
            format!("{:?}", r.status),
            r.iterations.to_string(),
            format!("{:.16e}", r.final_update_norm),
            format!("{:.16e}", r.pc_norm),
        ])
        .map_err(Error::from)?;
        println!(
            "lambda {:>10.4}  {:?}  iterations {:>4}  |y| {:.6e}",
            r.lambda, r.status, r.iterations, r.pc_norm
        );
    }
    out.flush().map_err(Error::from)?;
    Ok(())
}
