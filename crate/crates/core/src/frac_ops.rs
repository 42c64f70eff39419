//! Left-sided Riemann-Liouville integrals and derivatives and the Caputo
//! derivative on grid functions.
//!
//! All weakly singular integrals use product integration: the smooth factor is
//! replaced by its piecewise-linear interpolant on the mesh and integrated
//! against the kernel `(t - s)^e` in closed form. Integrals are assembled piece
//! by piece, so the two samples stored at an impulse point are each used on
//! their own side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Mesh, NodeRef};

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// A positive fractional order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(value: f64) -> Result<FractionalOrder> {
        if value.is_finite() && value > 0.0 {
            Ok(FractionalOrder(value))
        } else {
            Err(Error::validation("order", format!("fractional order must be positive, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `a^c - b^c` for `a > b >= 0`, without cancellation when `a` and `b` are close.
fn pow_diff(a: f64, b: f64, c: f64) -> f64 {
    if b == 0.0 {
        a.powf(c)
    } else {
        b.powf(c) * (c * ((a - b) / b).ln_1p()).exp_m1()
    }
}

/// Product-trapezoid weights for `∫_{s_0}^{s_last} (t - s)^e f(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    pub target: f64,
    pub weights: Vec<f64>,
    pub exponent: f64,
}

impl ProductWeights {
    /// Weights over `nodes` for target `t >= nodes.last()`. The result is exact
    /// for any `f` that is linear between consecutive nodes.
    pub fn new(nodes: &[f64], target: f64, exponent: f64) -> ProductWeights {
        debug_assert!(exponent > -1.0);
        debug_assert!(nodes.last().is_none_or(|&s| target >= s));
        let mut weights = vec![0.0; nodes.len()];
        let c1 = exponent + 1.0;
        let c2 = exponent + 2.0;
        for i in 0..nodes.len().saturating_sub(1) {
            let h = nodes[i + 1] - nodes[i];
            let far = target - nodes[i];
            let near = target - nodes[i + 1];
            let d1 = pow_diff(far, near, c1) / c1;
            let d2 = pow_diff(far, near, c2) / c2;
            // ∫ u^e (u - near) du and ∫ u^e (far - u) du over [near, far]
            let left = (d2 - near * d1) / h;
            let right = (far * d1 - d2) / h;
            weights[i] += left;
            weights[i + 1] += right;
        }
        ProductWeights { target, weights, exponent }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Where fractional integrals start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerLimit {
    /// From `0` across every impulse point.
    Origin,
    /// From the left end `t_k` of the piece holding the target node.
    PieceStart,
}

/// `I^a` at every stored sample, as precomputed weight rows.
///
/// Row `r` holds the weights of flat samples `start..start + len` for the
/// target sample with flat index `r`.
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    mesh: Arc<Mesh>,
    order: FractionalOrder,
    lower: LowerLimit,
    rows: Vec<(usize, Vec<f64>)>,
}

impl IntegralOperator {
    pub fn new(mesh: Arc<Mesh>, order: FractionalOrder, lower: LowerLimit) -> IntegralOperator {
        let exponent = order.value() - 1.0;
        let scale = 1.0 / gamma(order.value());
        let m = mesh.nodes_per_subinterval();
        let mut rows = Vec::with_capacity(mesh.sample_count());
        for (node, t, _) in mesh.samples() {
            let first_piece = match lower {
                LowerLimit::Origin => 0,
                LowerLimit::PieceStart => node.piece,
            };
            let mut row = Vec::with_capacity((node.piece - first_piece) * (m + 1) + node.index + 1);
            for k in first_piece..node.piece {
                row.extend(ProductWeights::new(mesh.piece(k), t, exponent).weights);
            }
            row.extend(ProductWeights::new(&mesh.piece(node.piece)[..=node.index], t, exponent).weights);
            row.iter_mut().for_each(|w| *w *= scale);
            rows.push((first_piece * (m + 1), row));
        }
        IntegralOperator { mesh, order, lower, rows }
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn lower(&self) -> LowerLimit {
        self.lower
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Applies the operator to the values of `f` (derivatives are ignored).
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        let flat: Vec<f64> = f.values().iter().flatten().copied().collect();
        let m = self.mesh.nodes_per_subinterval();
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(self.mesh.piece_count());
        for (r, (start, row)) in self.rows.iter().enumerate() {
            if r % (m + 1) == 0 {
                values.push(Vec::with_capacity(m + 1));
            }
            let v: f64 = row.iter().zip(&flat[*start..]).map(|(w, x)| w * x).sum();
            values.last_mut().unwrap().push(v);
        }
        GridFunction::from_values(Arc::clone(&self.mesh), values)
            .expect("operator rows follow the mesh layout")
    }
}

/// `(I_{0+}^a f)` at every stored sample.
pub fn rl_integral_grid(order: FractionalOrder, f: &GridFunction) -> GridFunction {
    IntegralOperator::new(Arc::clone(f.mesh()), order, LowerLimit::Origin).apply(f)
}

/// `(I_{t_k+}^a f)` at every stored sample of piece `k`, for every piece.
pub fn rl_integral_piecewise(order: FractionalOrder, f: &GridFunction) -> GridFunction {
    IntegralOperator::new(Arc::clone(f.mesh()), order, LowerLimit::PieceStart).apply(f)
}

/// `(I_{lower+}^a f)(t)` by product integration. Both limits must be mesh
/// nodes. An impulse point used as `lower` starts at its right limit and one
/// used as `t` ends at its left limit.
pub fn rl_integral(order: FractionalOrder, f: &GridFunction, lower: f64, t: f64) -> Result<f64> {
    if t < lower {
        return Err(Error::precondition(format!("upper limit {t} is below lower limit {lower}")));
    }
    let mesh = f.mesh();
    let end =
        mesh.locate_upper(t).ok_or_else(|| Error::precondition(format!("t = {t} is not a mesh node")))?;
    let start = mesh
        .locate_lower(lower)
        .ok_or_else(|| Error::precondition(format!("lower = {lower} is not a mesh node")))?;
    if t == lower {
        return Ok(0.0);
    }
    let exponent = order.value() - 1.0;
    let mut sum = 0.0;
    for k in start.piece..=end.piece {
        let nodes = mesh.piece(k);
        let from = if k == start.piece { start.index } else { 0 };
        let to = if k == end.piece { end.index } else { nodes.len() - 1 };
        if to <= from {
            continue;
        }
        let pw = ProductWeights::new(&nodes[from..=to], t, exponent);
        sum += pw.apply(&f.piece_values(k)[from..=to]);
    }
    Ok(sum / gamma(order.value()))
}

/// First derivative of samples on a uniform piece: centered inside, one-sided
/// second order at both ends.
pub(crate) fn differentiate_piece(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3);
    (0..n)
        .map(|j| {
            if j == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
            } else {
                (values[j + 1] - values[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Second derivative of samples on a uniform piece: centered inside, one-sided
/// second order at both ends.
pub(crate) fn second_difference_piece(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 4);
    let h2 = h * h;
    (0..n)
        .map(|j| {
            if j == 0 {
                (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2
            } else if j == n - 1 {
                (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2
            } else {
                (values[j - 1] - 2.0 * values[j] + values[j + 1]) / h2
            }
        })
        .collect()
}

fn check_rl_derivative_order(order: FractionalOrder) -> Result<()> {
    if order.value() > 1.0 {
        return Err(Error::validation(
            "beta",
            format!("Riemann-Liouville derivative order must lie in (0, 1], got {}", order.value()),
        ));
    }
    Ok(())
}

/// Starting weights on the samples at `t_1, t_2` of the first piece that make
/// the product rule for `I^{1-b}` exact on `t^b` and `t^{1+b}`, the leading
/// terms near the origin of any `f = I^b φ` with smooth `φ`. The trapezoid
/// rule alone is already exact on `1` and `t`.
struct StartingWeights {
    b: f64,
    nodes: [f64; 2],
}

impl StartingWeights {
    fn new(b: f64, mesh: &Mesh) -> StartingWeights {
        let first = mesh.piece(0);
        StartingWeights { b, nodes: [first[1], first[2]] }
    }

    fn exponents(&self) -> [f64; 2] {
        [self.b, 1.0 + self.b]
    }

    fn exact(&self, sigma: f64, t: f64) -> f64 {
        gamma(sigma + 1.0) / gamma(sigma + 2.0 - self.b) * t.powf(sigma + 1.0 - self.b)
    }

    /// Weights for a target whose product-rule values on `t^σ` are `approx`.
    fn weights(&self, t: f64, approx: [f64; 2]) -> [f64; 2] {
        let [s0, s1] = self.exponents();
        let [t1, t2] = self.nodes;
        let r0 = self.exact(s0, t) - approx[0];
        let r1 = self.exact(s1, t) - approx[1];
        // w1 t1^σ + w2 t2^σ = r_σ, scaled by t1^σ
        let (a, b) = (1.0, (t2 / t1).powf(s0));
        let (c, d) = (1.0, (t2 / t1).powf(s1));
        let (r0, r1) = (r0 / t1.powf(s0), r1 / t1.powf(s1));
        let det = a * d - b * c;
        [(r0 * d - b * r1) / det, (a * r1 - c * r0) / det]
    }

    fn apply(&self, w: [f64; 2], f: &GridFunction) -> f64 {
        let first = f.piece_values(0);
        w[0] * first[1] + w[1] * first[2]
    }
}

/// `D(I_{0+}^{1-b} f)` at every stored sample, differentiated inside each
/// smooth piece. Order `1` is the plain derivative. The inner integral carries
/// starting weights, so functions behaving like `t^b` at the origin keep full
/// accuracy near it.
pub fn rl_derivative_grid(order: FractionalOrder, f: &GridFunction) -> Result<GridFunction> {
    check_rl_derivative_order(order)?;
    let mesh = Arc::clone(f.mesh());
    let antiderivative = if order.value() == 1.0 {
        f.clone().without_derivative()
    } else {
        let sub = FractionalOrder(1.0 - order.value());
        let op = IntegralOperator::new(Arc::clone(&mesh), sub, LowerLimit::Origin);
        let start = StartingWeights::new(order.value(), &mesh);
        let [s0, s1] = start.exponents();
        let p0 = op.apply(&GridFunction::from_fn(Arc::clone(&mesh), |t| t.powf(s0)));
        let p1 = op.apply(&GridFunction::from_fn(Arc::clone(&mesh), |t| t.powf(s1)));
        let base = op.apply(f);
        let values = (0..mesh.piece_count())
            .map(|k| {
                mesh.piece(k)
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| {
                        let w = start.weights(t, [p0.piece_values(k)[j], p1.piece_values(k)[j]]);
                        base.piece_values(k)[j] + start.apply(w, f)
                    })
                    .collect()
            })
            .collect();
        GridFunction::from_values(Arc::clone(&mesh), values)?
    };
    let values = (0..mesh.piece_count())
        .map(|k| differentiate_piece(antiderivative.piece_values(k), mesh.spacing(k)))
        .collect();
    GridFunction::from_values(mesh, values)
}

/// `(D_{0+}^b f)(t)` at a single node, using the three-point stencil of the
/// piece that holds `t` (the left piece at an impulse point).
pub fn rl_derivative(order: FractionalOrder, f: &GridFunction, t: f64) -> Result<f64> {
    check_rl_derivative_order(order)?;
    let mesh = f.mesh();
    let node =
        mesh.locate_upper(t).ok_or_else(|| Error::precondition(format!("t = {t} is not a mesh node")))?;
    let nodes = mesh.piece(node.piece);
    let m = nodes.len() - 1;
    let stencil: [usize; 3] = match node.index {
        0 => [0, 1, 2],
        j if j == m => [m - 2, m - 1, m],
        j => [j - 1, j, j + 1],
    };
    let mut g = [0.0; 3];
    if order.value() == 1.0 {
        for (slot, &j) in g.iter_mut().zip(&stencil) {
            *slot = f.piece_values(node.piece)[j];
        }
    } else {
        let sub = FractionalOrder(1.0 - order.value());
        let start = StartingWeights::new(order.value(), mesh);
        let [s0, s1] = start.exponents();
        let q0 = GridFunction::from_fn(Arc::clone(mesh), |t| t.powf(s0));
        let q1 = GridFunction::from_fn(Arc::clone(mesh), |t| t.powf(s1));
        for (slot, &j) in g.iter_mut().zip(&stencil) {
            let at = NodeRef { piece: node.piece, index: j };
            let approx = [integral_to_node(sub, &q0, at), integral_to_node(sub, &q1, at)];
            let w = start.weights(nodes[j], approx);
            *slot = integral_to_node(sub, f, at) + start.apply(w, f);
        }
    }
    let h = mesh.spacing(node.piece);
    let position = stencil.iter().position(|&j| j == node.index).unwrap();
    Ok(differentiate_piece(&g, h)[position])
}

/// `I_{0+}^a f` ending at a specific sample; at index 0 of a piece this is the
/// integral up to the piece start.
fn integral_to_node(order: FractionalOrder, f: &GridFunction, node: NodeRef) -> f64 {
    let mesh = f.mesh();
    let nodes = mesh.piece(node.piece);
    let t = nodes[node.index];
    let exponent = order.value() - 1.0;
    let mut sum = 0.0;
    for k in 0..node.piece {
        sum += ProductWeights::new(mesh.piece(k), t, exponent).apply(f.piece_values(k));
    }
    sum += ProductWeights::new(&nodes[..=node.index], t, exponent)
        .apply(&f.piece_values(node.piece)[..=node.index]);
    sum / gamma(order.value())
}

/// How the Caputo derivative obtains the second derivative inside a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaputoScheme {
    /// Second differences of the values `y`, interpolated linearly and
    /// product-integrated.
    SecondDifference,
    /// Increments of stored `y′` samples, constant on each mesh interval and
    /// integrated exactly (the classical L1 scheme on `y′`).
    SlopeIncrements,
}

fn check_caputo_order(order: FractionalOrder) -> Result<()> {
    let a = order.value();
    if !(a > 1.0 && a <= 2.0) {
        return Err(Error::validation(
            "alpha",
            format!("Caputo derivative order must lie in (1, 2], got {a}"),
        ));
    }
    Ok(())
}

/// Caputo derivative `I_{t_k+}^{2-a} y″` of order `a ∈ (1, 2]` at every node,
/// with the memory restarting at the left end of each smooth piece.
pub fn caputo_derivative_grid(order: FractionalOrder, y: &GridFunction) -> Result<GridFunction> {
    caputo_derivative_grid_with(order, y, CaputoScheme::SecondDifference)
}

pub fn caputo_derivative_grid_with(
    order: FractionalOrder,
    y: &GridFunction,
    scheme: CaputoScheme,
) -> Result<GridFunction> {
    check_caputo_order(order)?;
    let mesh = Arc::clone(y.mesh());
    let values = (0..mesh.piece_count())
        .map(|k| caputo_on_piece(order.value(), y, k, scheme))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(mesh, values)
}

/// Caputo derivative at a single node; at an impulse point the left piece is
/// used.
pub fn caputo_derivative(order: FractionalOrder, y: &GridFunction, t: f64) -> Result<f64> {
    check_caputo_order(order)?;
    let node =
        y.mesh().locate_upper(t).ok_or_else(|| Error::precondition(format!("t = {t} is not a mesh node")))?;
    let piece = caputo_on_piece(order.value(), y, node.piece, CaputoScheme::SecondDifference)?;
    Ok(piece[node.index])
}

fn caputo_on_piece(alpha: f64, y: &GridFunction, k: usize, scheme: CaputoScheme) -> Result<Vec<f64>> {
    let mesh = y.mesh();
    let nodes = mesh.piece(k);
    let h = mesh.spacing(k);
    let values = y.piece_values(k);
    match scheme {
        CaputoScheme::SecondDifference => {
            let ypp = second_difference_piece(values, h);
            if alpha == 2.0 {
                return Ok(ypp);
            }
            let exponent = 1.0 - alpha;
            let scale = 1.0 / gamma(2.0 - alpha);
            Ok((0..nodes.len())
                .map(|j| ProductWeights::new(&nodes[..=j], nodes[j], exponent).apply(&ypp[..=j]) * scale)
                .collect())
        }
        CaputoScheme::SlopeIncrements => {
            let slope = y.derivative_values().ok_or_else(|| {
                Error::precondition("slope-increment Caputo scheme needs derivative samples")
            })?;
            let slope = &slope[k];
            if alpha == 2.0 {
                return Ok(differentiate_piece(slope, h));
            }
            let c = 2.0 - alpha;
            let scale = 1.0 / gamma(3.0 - alpha);
            Ok((0..nodes.len())
                .map(|j| {
                    let t = nodes[j];
                    (0..j)
                        .map(|i| {
                            let rate = (slope[i + 1] - slope[i]) / h;
                            rate * pow_diff(t - nodes[i], t - nodes[i + 1], c)
                        })
                        .sum::<f64>()
                        * scale
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn order(v: f64) -> FractionalOrder {
        FractionalOrder::new(v).unwrap()
    }

    #[test]
    fn gamma_reference_values() {
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(1.5), PI.sqrt() / 2.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(2.5), 0.75 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(4.0), 6.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.3), 2.991_568_987_687_591, max_relative = 1e-13);
    }

    #[test]
    fn order_must_be_positive() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(-1.0).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn pow_diff_matches_direct() {
        assert_relative_eq!(pow_diff(3.0, 2.0, 0.5), 3f64.sqrt() - 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(pow_diff(2.0, 0.0, 1.5), 2f64.powf(1.5), max_relative = 1e-15);
    }

    #[test]
    fn weights_exact_for_linear_monomials() {
        // ∫_0^1 (1 - s)^e s^m ds = B(e + 1, m + 1)
        let nodes: Vec<f64> = (0..=7).map(|j| j as f64 / 7.0).collect();
        for e in [-0.7, -0.5, 0.0, 0.3, 1.0] {
            let pw = ProductWeights::new(&nodes, 1.0, e);
            let ones = vec![1.0; nodes.len()];
            let c1 = pw.apply(&ones);
            let c2 = pw.apply(&nodes);
            assert_relative_eq!(c1, 1.0 / (e + 1.0), max_relative = 1e-13);
            assert_relative_eq!(c2, 1.0 / ((e + 1.0) * (e + 2.0)), max_relative = 1e-13);
        }
        // disjoint target
        let pw = ProductWeights::new(&nodes, 2.0, -0.5);
        let exact = 2.0 * (2f64.sqrt() - 1.0);
        assert_relative_eq!(pw.apply(&[1.0; 8]), exact, max_relative = 1e-13);
    }

    #[test]
    fn integral_of_constant() {
        let mesh = Arc::new(Mesh::new(PI, &[1.0], 16).unwrap());
        let one = GridFunction::from_fn(mesh, |_| 1.0);
        assert_relative_eq!(rl_integral(order(1.0), &one, 0.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(rl_integral(order(1.0), &one, 1.0, PI).unwrap(), PI - 1.0, max_relative = 1e-14);
        let zero = one.map(|_| 0.0);
        assert_eq!(rl_integral(order(0.5), &zero, 0.0, PI).unwrap(), 0.0);
    }

    #[test]
    fn integral_of_identity_half_order() {
        // piecewise linear data, so the rule is exact at any resolution
        let mesh = Arc::new(Mesh::new(1.0, &[], 8).unwrap());
        let f = GridFunction::from_fn(mesh, |s| s);
        let exact = gamma(2.0) / gamma(2.5);
        assert_relative_eq!(rl_integral(order(0.5), &f, 0.0, 1.0).unwrap(), exact, max_relative = 1e-13);
        assert_relative_eq!(exact, 0.752_252_778_063_675, max_relative = 1e-12);
    }

    #[test]
    fn integral_errors() {
        let mesh = Arc::new(Mesh::new(PI, &[], 8).unwrap());
        let f = GridFunction::from_fn(mesh, |s| s);
        assert!(rl_integral(order(0.5), &f, PI, 0.0).is_err());
        assert!(rl_integral(order(0.5), &f, 0.0, 1.0).is_err());
    }

    #[test]
    fn grid_integral_matches_pointwise() {
        let mesh = Arc::new(Mesh::new(PI, &[0.7, 2.1], 12).unwrap());
        let f = GridFunction::from_piecewise(Arc::clone(&mesh), |k, s| (s + k as f64).sin());
        let a = order(0.6);
        let grid = rl_integral_grid(a, &f);
        for (node, t, _) in mesh.samples() {
            let direct = integral_to_node(a, &f, node);
            assert_relative_eq!(grid.at(node), direct, epsilon = 1e-14, max_relative = 1e-12);
            if node.index > 0 {
                let pointwise = rl_integral(a, &f, 0.0, t).unwrap();
                assert_relative_eq!(grid.at(node), pointwise, epsilon = 1e-14, max_relative = 1e-12);
            }
        }
        // piecewise lower limit
        let local = rl_integral_piecewise(a, &f);
        let node = NodeRef { piece: 1, index: 12 };
        let pointwise = rl_integral(a, &f, 0.7, 2.1).unwrap();
        assert_relative_eq!(local.at(node), pointwise, max_relative = 1e-12);
        assert_eq!(local.at(NodeRef { piece: 2, index: 0 }), 0.0);
    }

    #[test]
    fn rl_derivative_examples() {
        let mesh = Arc::new(Mesh::new(PI, &[], 64).unwrap());
        let zero = GridFunction::zeros(Arc::clone(&mesh));
        assert!(rl_derivative_grid(order(0.4), &zero).unwrap().pc_norm() == 0.0);

        let id = GridFunction::from_fn(Arc::clone(&mesh), |s| s);
        let d1 = rl_derivative_grid(order(1.0), &id).unwrap();
        assert!(d1.samples().all(|(_, _, _, v)| (v - 1.0).abs() < 1e-12));

        assert!(rl_derivative(order(1.5), &id, PI).is_err());
    }

    #[test]
    fn rl_derivative_half_order_of_identity() {
        // D^{1/2} s = s^{1/2} / Γ(3/2); the antiderivative is exact, only the
        // centred difference contributes error
        let mesh = Arc::new(Mesh::new(2.0, &[], 256).unwrap());
        let f = GridFunction::from_fn(mesh, |s| s);
        let exact = 1.0 / gamma(1.5);
        let got = rl_derivative(order(0.5), &f, 1.0).unwrap();
        assert!((got - exact).abs() < 1e-5, "{got} vs {exact}");
        assert_relative_eq!(exact, std::f64::consts::FRAC_2_SQRT_PI, max_relative = 1e-12);
    }

    #[test]
    fn rl_derivative_resolves_origin_singularity() {
        // D^b t^b = Γ(1+b) everywhere, including the first nodes where the
        // uncorrected rule is off by O(1)
        let mesh = Arc::new(Mesh::new(3.0, &[1.0], 32).unwrap());
        for b in [0.3, 0.7] {
            let f = GridFunction::from_fn(Arc::clone(&mesh), |t| t.powf(b));
            let d = rl_derivative_grid(order(b), &f).unwrap();
            for (_, _, _, v) in d.samples() {
                assert!((v - gamma(1.0 + b)).abs() < 1e-10, "beta {b}: {v}");
            }
            let t = mesh.piece(0)[1];
            assert_relative_eq!(rl_derivative(order(b), &f, t).unwrap(), gamma(1.0 + b), epsilon = 1e-10);
        }
    }

    #[test]
    fn caputo_annihilates_affine() {
        let mesh = Arc::new(Mesh::new(PI, &[1.3], 64).unwrap());
        let y = GridFunction::from_piecewise(Arc::clone(&mesh), |k, t| 2.0 - 0.5 * t + k as f64)
            .with_derivative_fn(|_, _| -0.5);
        for a in [1.25, 1.5, 1.75, 2.0] {
            for scheme in [CaputoScheme::SecondDifference, CaputoScheme::SlopeIncrements] {
                let d = caputo_derivative_grid_with(order(a), &y, scheme).unwrap();
                assert!(d.pc_norm() < 1e-9, "alpha {a}: {}", d.pc_norm());
            }
        }
    }

    #[test]
    fn caputo_of_square() {
        let mesh = Arc::new(Mesh::new(2.0, &[], 32).unwrap());
        let y = GridFunction::from_fn(Arc::clone(&mesh), |t| t * t).with_derivative_fn(|_, t| 2.0 * t);
        let exact = 2.0 / gamma(1.5);
        assert_relative_eq!(caputo_derivative(order(1.5), &y, 1.0).unwrap(), exact, max_relative = 1e-10);
        let l1 = caputo_derivative_grid_with(order(1.5), &y, CaputoScheme::SlopeIncrements).unwrap();
        assert_relative_eq!(l1.value_at(1.0).unwrap(), exact, max_relative = 1e-10);
        assert_relative_eq!(exact, 2.256_758_334_191_025, max_relative = 1e-12);
    }

    #[test]
    fn caputo_order_range() {
        let mesh = Arc::new(Mesh::new(PI, &[], 8).unwrap());
        let y = GridFunction::zeros(mesh);
        assert!(caputo_derivative(order(1.0), &y, 0.0).is_err());
        assert!(caputo_derivative(order(2.5), &y, 0.0).is_err());
        assert_eq!(caputo_derivative(order(1.5), &y, PI).unwrap(), 0.0);
    }
}
