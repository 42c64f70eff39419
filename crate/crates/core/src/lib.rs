//! Numerical solver for the impulsive fractional p-Laplacian Sturm-Liouville
//! problem
//!
//! ```text
//! -D^β φ_p(ᶜD^α y) + (2λ p(t) + q(t)) y = 0,   t ∈ (0, π) \ {t_1, …, t_n}
//! Δy(t_k) = I_k(y(t_k)),  Δy′(t_k) = I_k^*(y(t_k)),
//! y(0) + y′(0) = 0,  y(π) + y′(π) = 0,
//! ```
//!
//! with `1 < α ≤ 2`, `0 < β ≤ 1`. Solutions are fixed points of the integral
//! operator in [`solver`], found by damped Picard iteration and checked
//! against the differential form in [`verify`].
//!
//! ```
//! use plap_frac::problem::ProblemSpec;
//! use plap_frac::solver::{Operator, SolverSettings};
//!
//! let spec = ProblemSpec::parse(1.5, 0.5, 0.1, "sin(t)", "0.3", 2.0,
//!     &[(1.0, "0.1*y+0.05", "0")]).unwrap();
//! let op = Operator::new(&spec, spec.mesh(64).unwrap()).unwrap();
//! let result = op.solve(&SolverSettings::default()).unwrap();
//! assert!(result.converged);
//! ```

pub mod cli;
pub mod error;
pub mod expr;
pub mod frac_ops;
pub mod grid;
pub mod io;
pub mod p_laplacian;
pub mod problem;
pub mod solver;
pub mod verify;

pub use error::{Error, EvalError, Result};
pub use grid::{GridFunction, Mesh, Side};
pub use problem::ProblemSpec;
pub use solver::{Mode, Operator, SolverSettings};
