//! Impulse-aligned meshes and piecewise-continuous grid functions.
//!
//! A [`Mesh`] splits `[0, L]` into the smooth pieces `(t_k, t_{k+1}]` cut out by
//! the impulse points. Every piece carries its own uniform node set, and the
//! node shared by two neighbouring pieces is stored once in each of them, so a
//! [`GridFunction`] keeps both one-sided limits at every impulse point.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest number of subintervals allowed in one smooth piece.
pub const MIN_NODES_PER_SUBINTERVAL: usize = 4;

/// Which one-sided limit a stored sample represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Left limit `y(t_k^-)` at an impulse point.
    Left,
    /// Right limit `y(t_k^+)` at an impulse point.
    Right,
    /// Any other node, including both interval ends.
    Interior,
}

impl Side {
    pub fn as_char(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
            Side::Interior => 'I',
        }
    }

    pub fn from_char(c: char) -> Option<Side> {
        match c {
            'L' => Some(Side::Left),
            'R' => Some(Side::Right),
            'I' => Some(Side::Interior),
            _ => None,
        }
    }
}

/// Position of a stored sample: smooth piece and node index inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRef {
    pub piece: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    interval_end: f64,
    impulse_points: Vec<f64>,
    nodes_per_subinterval: usize,
    pieces: Vec<Vec<f64>>,
}

impl Mesh {
    /// Builds a mesh over `[0, interval_end]` whose pieces end exactly at the
    /// impulse points. `nodes_per_subinterval` is the number of uniform steps
    /// in each piece, so every piece holds `nodes_per_subinterval + 1` nodes.
    pub fn new(interval_end: f64, impulse_points: &[f64], nodes_per_subinterval: usize) -> Result<Mesh> {
        if !(interval_end.is_finite() && interval_end > 0.0) {
            return Err(Error::validation(
                "interval_end",
                format!("must be finite and positive, got {interval_end}"),
            ));
        }
        if nodes_per_subinterval < MIN_NODES_PER_SUBINTERVAL {
            return Err(Error::validation(
                "nodes_per_subinterval",
                format!("must be at least {MIN_NODES_PER_SUBINTERVAL}, got {nodes_per_subinterval}"),
            ));
        }
        let mut previous = 0.0;
        for (k, &t) in impulse_points.iter().enumerate() {
            if !(t.is_finite() && t > 0.0 && t < interval_end) {
                return Err(Error::validation(
                    format!("impulses[{k}].t"),
                    format!("impulse point {t} is outside the open interval (0, {interval_end})"),
                ));
            }
            if t <= previous {
                return Err(Error::validation(
                    format!("impulses[{k}].t"),
                    format!("impulse points must be strictly increasing ({t} follows {previous})"),
                ));
            }
            previous = t;
        }

        let mut bounds = Vec::with_capacity(impulse_points.len() + 2);
        bounds.push(0.0);
        bounds.extend_from_slice(impulse_points);
        bounds.push(interval_end);

        let m = nodes_per_subinterval;
        let pieces = bounds
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let mut nodes: Vec<f64> = (0..=m).map(|j| a + (b - a) * (j as f64) / (m as f64)).collect();
                // pin both ends so impulse points are reproduced bit for bit
                nodes[0] = a;
                nodes[m] = b;
                nodes
            })
            .collect();

        Ok(Mesh { interval_end, impulse_points: impulse_points.to_vec(), nodes_per_subinterval, pieces })
    }

    pub fn interval_end(&self) -> f64 {
        self.interval_end
    }

    pub fn impulse_points(&self) -> &[f64] {
        &self.impulse_points
    }

    /// Number of impulse points `n`.
    pub fn impulse_count(&self) -> usize {
        self.impulse_points.len()
    }

    pub fn nodes_per_subinterval(&self) -> usize {
        self.nodes_per_subinterval
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Nodes of piece `k`, from `t_k` to `t_{k+1}` inclusive.
    pub fn piece(&self, k: usize) -> &[f64] {
        &self.pieces[k]
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Uniform spacing inside piece `k`.
    pub fn spacing(&self, k: usize) -> f64 {
        let nodes = &self.pieces[k];
        (nodes[nodes.len() - 1] - nodes[0]) / self.nodes_per_subinterval as f64
    }

    /// Left end `t_k` of piece `k`.
    pub fn piece_start(&self, k: usize) -> f64 {
        self.pieces[k][0]
    }

    /// Right end `t_{k+1}` of piece `k`.
    pub fn piece_end(&self, k: usize) -> f64 {
        self.pieces[k][self.nodes_per_subinterval]
    }

    /// Distinct node abscissae over the whole interval, in increasing order.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.piece_count() * self.nodes_per_subinterval + 1);
        for (k, piece) in self.pieces.iter().enumerate() {
            let skip = if k == 0 { 0 } else { 1 };
            out.extend_from_slice(&piece[skip..]);
        }
        out
    }

    /// Total number of stored samples (impulse nodes counted twice).
    pub fn sample_count(&self) -> usize {
        self.piece_count() * (self.nodes_per_subinterval + 1)
    }

    pub fn flat_index(&self, node: NodeRef) -> usize {
        node.piece * (self.nodes_per_subinterval + 1) + node.index
    }

    pub fn side(&self, node: NodeRef) -> Side {
        let last = self.piece_count() - 1;
        if node.index == self.nodes_per_subinterval && node.piece < last {
            Side::Left
        } else if node.index == 0 && node.piece > 0 {
            Side::Right
        } else {
            Side::Interior
        }
    }

    /// Finds `t` as a node, preferring the sample that ends a piece, i.e. the
    /// left limit at an impulse point. This is the sample an integral with
    /// upper limit `t` should stop at.
    pub fn locate_upper(&self, t: f64) -> Option<NodeRef> {
        for (k, piece) in self.pieces.iter().enumerate() {
            if t < piece[0] || t > piece[self.nodes_per_subinterval] {
                continue;
            }
            if let Some(j) = piece.iter().position(|&s| s == t) {
                if j == 0 && k > 0 {
                    return Some(NodeRef { piece: k - 1, index: self.nodes_per_subinterval });
                }
                return Some(NodeRef { piece: k, index: j });
            }
        }
        None
    }

    /// Finds `t` as a node, preferring the sample that starts a piece, i.e. the
    /// right limit at an impulse point.
    pub fn locate_lower(&self, t: f64) -> Option<NodeRef> {
        let m = self.nodes_per_subinterval;
        let last = self.piece_count() - 1;
        self.locate_upper(t).map(|node| {
            if node.index == m && node.piece < last {
                NodeRef { piece: node.piece + 1, index: 0 }
            } else {
                node
            }
        })
    }

    /// Every stored sample as `(node, t, side)`, piece by piece.
    pub fn samples(&self) -> impl Iterator<Item = (NodeRef, f64, Side)> + '_ {
        self.pieces.iter().enumerate().flat_map(move |(k, piece)| {
            piece.iter().enumerate().map(move |(j, &t)| {
                let node = NodeRef { piece: k, index: j };
                (node, t, self.side(node))
            })
        })
    }
}

/// A piecewise-continuous function sampled on a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<Vec<f64>>,
    derivative: Option<Vec<Vec<f64>>>,
}

impl GridFunction {
    pub fn zeros(mesh: Arc<Mesh>) -> GridFunction {
        let values = mesh.pieces().iter().map(|p| vec![0.0; p.len()]).collect();
        GridFunction { mesh, values, derivative: None }
    }

    /// Samples one continuous function; both limits at impulse nodes agree.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64) -> GridFunction {
        Self::from_piecewise(mesh, |_, t| f(t))
    }

    /// Samples `f(piece, t)`; the piece index picks the branch at impulse nodes.
    pub fn from_piecewise(mesh: Arc<Mesh>, f: impl Fn(usize, f64) -> f64) -> GridFunction {
        let values =
            mesh.pieces().iter().enumerate().map(|(k, p)| p.iter().map(|&t| f(k, t)).collect()).collect();
        GridFunction { mesh, values, derivative: None }
    }

    pub fn from_values(mesh: Arc<Mesh>, values: Vec<Vec<f64>>) -> Result<GridFunction> {
        check_shape(&mesh, &values, "values")?;
        Ok(GridFunction { mesh, values, derivative: None })
    }

    pub fn with_derivative(mut self, derivative: Vec<Vec<f64>>) -> Result<GridFunction> {
        check_shape(&self.mesh, &derivative, "derivative_values")?;
        self.derivative = Some(derivative);
        Ok(self)
    }

    pub fn with_derivative_fn(self, f: impl Fn(usize, f64) -> f64) -> GridFunction {
        let d = self
            .mesh
            .pieces()
            .iter()
            .enumerate()
            .map(|(k, p)| p.iter().map(|&t| f(k, t)).collect())
            .collect();
        GridFunction { derivative: Some(d), ..self }
    }

    pub fn without_derivative(mut self) -> GridFunction {
        self.derivative = None;
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn piece_values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn derivative_values(&self) -> Option<&[Vec<f64>]> {
        self.derivative.as_deref()
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn at(&self, node: NodeRef) -> f64 {
        self.values[node.piece][node.index]
    }

    pub fn derivative_at(&self, node: NodeRef) -> Option<f64> {
        self.derivative.as_ref().map(|d| d[node.piece][node.index])
    }

    /// `y(t)` at a node. At an impulse point this is the left limit,
    /// following the convention `y(t_k) = y(t_k^-)`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.mesh.locate_upper(t).map(|n| self.at(n))
    }

    /// Left limit `y(t_k^-)` at impulse `k` (1-based).
    pub fn left_limit(&self, k: usize) -> Result<f64> {
        self.check_impulse_index(k)?;
        let m = self.mesh.nodes_per_subinterval();
        Ok(self.values[k - 1][m])
    }

    /// Right limit `y(t_k^+)` at impulse `k` (1-based).
    pub fn right_limit(&self, k: usize) -> Result<f64> {
        self.check_impulse_index(k)?;
        Ok(self.values[k][0])
    }

    /// Value and derivative at `t = 0` (first sample).
    pub fn first(&self) -> (f64, Option<f64>) {
        let node = NodeRef { piece: 0, index: 0 };
        (self.at(node), self.derivative_at(node))
    }

    /// Value and derivative at the right end of the interval (last sample).
    pub fn last(&self) -> (f64, Option<f64>) {
        let node = NodeRef { piece: self.mesh.piece_count() - 1, index: self.mesh.nodes_per_subinterval() };
        (self.at(node), self.derivative_at(node))
    }

    fn check_impulse_index(&self, k: usize) -> Result<()> {
        let n = self.mesh.impulse_count();
        if k == 0 || k > n {
            return Err(Error::precondition(format!("impulse index {k} out of range 1..={n}")));
        }
        Ok(())
    }

    /// Sup norm over every stored sample, both one-sided limits included.
    pub fn pc_norm(&self) -> f64 {
        self.values.iter().flat_map(|p| p.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Sup norm of the stored derivative samples, if present.
    pub fn derivative_pc_norm(&self) -> Option<f64> {
        self.derivative
            .as_ref()
            .map(|d| d.iter().flat_map(|p| p.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    /// `(Δy, Δy′)` at impulse `k` (1-based).
    pub fn jump_at(&self, k: usize) -> Result<(f64, f64)> {
        let dy = self.right_limit(k)? - self.left_limit(k)?;
        let d = self.derivative.as_ref().ok_or_else(|| {
            Error::precondition("derivative jump requested but no derivative samples are stored")
        })?;
        let m = self.mesh.nodes_per_subinterval();
        Ok((dy, d[k][0] - d[k - 1][m]))
    }

    /// Jump in the values only; usable when no derivative is stored.
    pub fn value_jump_at(&self, k: usize) -> Result<f64> {
        Ok(self.right_limit(k)? - self.left_limit(k)?)
    }

    /// Applies `f` sample by sample; derivative samples are dropped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = self.values.iter().map(|p| p.iter().map(|&v| f(v)).collect()).collect();
        GridFunction { mesh: Arc::clone(&self.mesh), values, derivative: None }
    }

    /// Combines two functions on the same mesh sample by sample. Derivatives
    /// are combined too when both carry them.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        debug_assert!(Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh);
        let zip = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
            a.iter().zip(b).map(|(pa, pb)| pa.iter().zip(pb).map(|(&x, &y)| f(x, y)).collect()).collect()
        };
        let values = zip(&self.values, &other.values);
        let derivative = match (&self.derivative, &other.derivative) {
            (Some(a), Some(b)) => Some(zip(a, b)),
            _ => None,
        };
        GridFunction { mesh: Arc::clone(&self.mesh), values, derivative }
    }

    /// `self - other`, derivatives included when both are present.
    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a - b)
    }

    /// `c * self`, derivatives included.
    pub fn scale(&self, c: f64) -> GridFunction {
        let scale = |a: &[Vec<f64>]| -> Vec<Vec<f64>> {
            a.iter().map(|p| p.iter().map(|&v| c * v).collect()).collect()
        };
        GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: scale(&self.values),
            derivative: self.derivative.as_deref().map(scale),
        }
    }

    pub fn is_finite(&self) -> bool {
        let finite = |a: &[Vec<f64>]| a.iter().flat_map(|p| p.iter()).all(|v| v.is_finite());
        finite(&self.values) && self.derivative.as_deref().is_none_or(finite)
    }

    /// Every stored sample as `(node, t, side, value)`.
    pub fn samples(&self) -> impl Iterator<Item = (NodeRef, f64, Side, f64)> + '_ {
        self.mesh.samples().map(move |(n, t, s)| (n, t, s, self.at(n)))
    }
}

fn check_shape(mesh: &Mesh, values: &[Vec<f64>], what: &str) -> Result<()> {
    if values.len() != mesh.piece_count()
        || values.iter().any(|p| p.len() != mesh.nodes_per_subinterval() + 1)
    {
        return Err(Error::validation(what, "array lengths do not match the mesh's node counts"));
    }
    Ok(())
}
