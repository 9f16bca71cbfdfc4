use std::f64::consts::FRAC_1_SQRT_2;

use super::data::{DirichletData, NodalData, TraceFunction};
use super::kernel::{cross, dot, norm, sub};
use crate::error::{input, Result};
use crate::goals::{Reference, ReferenceKind};
use crate::mesh::{BoundaryMesh, MarkedSet, Point};
use crate::quadrature::Adaptive;

/// Half the length of the long edges along each axis: the L-shape is the
/// square `|x| + |y| <= 2K` minus the square with corners `0` and `(-2K, 0)`.
const K: f64 = FRAC_1_SQRT_2 / 4.0;

/// Counter-clockwise nodes of the initial mesh. Node 1 sits at arclength
/// 1/4 and node 4 is the reentrant corner at arclength 1.
pub fn lshape_nodes() -> Vec<Point> {
    vec![
        [2.0 * K, 0.0],
        [K, K],
        [0.0, 2.0 * K],
        [-K, K],
        [0.0, 0.0],
        [-K, -K],
        [0.0, -2.0 * K],
        [K, -K],
    ]
}

/// Eight panels of length 1/4; diameter `1/sqrt 2`.
pub fn lshape_mesh() -> BoundaryMesh {
    BoundaryMesh::polygon(lshape_nodes()).expect("valid polygon")
}

const CORNERS: [usize; 6] = [0, 2, 3, 4, 5, 6];

/// `r^(2/3) cos(2 alpha / 3)` with `alpha` in `(-pi, pi]`; harmonic in the
/// L-shape and zero on both edges at the reentrant corner.
pub fn lshape_phi(x: Point) -> f64 {
    let r = norm(x);
    if r == 0.0 {
        return 0.0;
    }
    r.powf(2.0 / 3.0) * (2.0 / 3.0 * x[1].atan2(x[0])).cos()
}

/// Gradient of [`lshape_phi`]: `(2/3) r^(-1/3) (cos(alpha/3), sin(alpha/3))`,
/// set to zero at the singular point.
pub fn lshape_phi_gradient(x: Point) -> Point {
    let r = norm(x);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let a = x[1].atan2(x[0]) / 3.0;
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    [c * a.cos(), c * a.sin()]
}

/// Outward normal of the edge containing `x`; corners are rejected.
fn edge_normal(x: Point) -> Result<Point> {
    let nodes = lshape_nodes();
    let n = nodes.len();
    for &c in &CORNERS {
        if norm(sub(x, nodes[c])) < 1e-14 {
            return input(format!("{x:?} is a corner of the L-shape"));
        }
    }
    for i in 0..n {
        let (a, b) = (nodes[i], nodes[(i + 1) % n]);
        let e = sub(b, a);
        let l = norm(e);
        let t = [e[0] / l, e[1] / l];
        let s = dot(sub(x, a), t);
        if cross(t, sub(x, a)).abs() <= 1e-12 && s >= -1e-12 && s <= l + 1e-12 {
            return Ok([t[1], -t[0]]);
        }
    }
    input(format!("{x:?} is not on the L-shape boundary"))
}

/// Exact density `u = d/dn [r^(2/3) cos(2 alpha / 3)]`.
pub fn lshape_exact(x: Point) -> Result<f64> {
    let n = edge_normal(x)?;
    Ok(dot(lshape_phi_gradient(x), n))
}

/// `F = (K + 1/2) phi` for the benchmark.
pub fn lshape_dirichlet() -> DirichletData {
    DirichletData::new(TraceFunction::new(lshape_phi, lshape_phi_gradient), lshape_mesh())
}

/// Weight `Lambda` of the boundary goal `int Lambda u ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BemGoalWeight {
    /// Hat function of the initial mesh at the given node.
    ConformingHat { node: usize },
    /// Characteristic function of the arclength interval `[start, end]`.
    Characteristic { start: f64, end: f64 },
}

impl BemGoalWeight {
    /// Hat at the node at arclength 1/4.
    pub fn lshape_hat() -> Self {
        BemGoalWeight::ConformingHat { node: 1 }
    }

    /// Indicator of the arclength interval `[1/4, 1/2]`.
    pub fn lshape_characteristic() -> Self {
        BemGoalWeight::Characteristic { start: 0.25, end: 0.5 }
    }

    pub fn is_conforming(&self) -> bool {
        matches!(self, BemGoalWeight::ConformingHat { .. })
    }

    /// `Lambda` at node `i` of `mesh`.
    fn at_node(&self, mesh: &BoundaryMesh, i: usize, roots: &[f64]) -> f64 {
        match *self {
            BemGoalWeight::ConformingHat { .. } => self.at(mesh.node_arclength(i), roots, mesh.perimeter()),
            BemGoalWeight::Characteristic { start, end } => {
                let inside = mesh.compare_arclength(i, start).is_ge() && mesh.compare_arclength(i, end).is_le();
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `Lambda` at arclength `s` in `[0, L)` on a curve whose initial nodes
    /// sit at the arclengths `roots`.
    fn at(&self, s: f64, roots: &[f64], perimeter: f64) -> f64 {
        match *self {
            BemGoalWeight::ConformingHat { node } => {
                let n = roots.len();
                let z = roots[node];
                let prev = if node == 0 { roots[n - 1] - perimeter } else { roots[node - 1] };
                let next = if node + 1 == n { perimeter } else { roots[node + 1] };
                let mut s = s;
                if s > next {
                    s -= perimeter;
                }
                if s >= prev && s <= z {
                    (s - prev) / (z - prev)
                } else if s > z && s <= next {
                    (next - s) / (next - z)
                } else {
                    0.0
                }
            }
            BemGoalWeight::Characteristic { start, end } => {
                if s >= start && s <= end {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Nodal interpolant `Lambda_l` on `mesh` and the panels on which it is
    /// not constant while `Lambda` jumps (characteristic weights only).
    pub fn interp_weight(&self, mesh: &BoundaryMesh, initial: &BoundaryMesh) -> (NodalData, MarkedSet) {
        let roots: Vec<f64> = (0..initial.num_panels()).map(|i| initial.node_arclength(i)).collect();
        let values: Vec<f64> = (0..mesh.num_panels()).map(|i| self.at_node(mesh, i, &roots)).collect();
        let forced = match self {
            BemGoalWeight::ConformingHat { .. } => MarkedSet::empty(),
            BemGoalWeight::Characteristic { .. } => {
                let n = values.len();
                (0..n).filter(|&i| values[i] != values[(i + 1) % n]).collect()
            }
        };
        (NodalData { values }, forced)
    }

    /// `int Lambda w ds` for a piecewise constant `w`.
    pub fn goal(&self, mesh: &BoundaryMesh, initial: &BoundaryMesh, w: &[f64]) -> f64 {
        let roots: Vec<f64> = (0..initial.num_panels()).map(|i| initial.node_arclength(i)).collect();
        let n = mesh.num_panels();
        let nodal: Vec<f64> = (0..n).map(|i| self.at_node(mesh, i, &roots)).collect();
        (0..n)
            .map(|i| {
                let h = mesh.element_size(i);
                let (a, b) = (nodal[i], nodal[(i + 1) % n]);
                let mass = match *self {
                    // Lambda is linear on every panel
                    BemGoalWeight::ConformingHat { .. } => 0.5 * h * (a + b),
                    BemGoalWeight::Characteristic { start, end } => match (a > 0.5, b > 0.5) {
                        (true, true) => h,
                        (false, false) if h < end - start => 0.0,
                        _ => {
                            let (s0, s1) = mesh.arclength_range(i);
                            (s1.min(end) - s0.max(start)).max(0.0)
                        }
                    },
                };
                w[i] * mass
            })
            .sum()
    }

    /// `int Lambda u ds` for the exact benchmark density.
    pub fn lshape_reference(&self) -> Result<Reference> {
        let mesh = lshape_mesh();
        let roots: Vec<f64> = (0..mesh.num_panels()).map(|i| mesh.node_arclength(i)).collect();
        let l = mesh.perimeter();
        let quad = Adaptive::new(1e-17, 1e-15);
        let mut total = 0.0;
        for i in 0..mesh.num_panels() {
            let (a, b) = mesh.endpoints(i);
            let (s0, s1) = mesh.arclength_range(i);
            let n = mesh.normal(i);
            let h = s1 - s0;
            // tau^3 substitution clusters nodes at the start of the panel
            let singular_at_start = norm(a) == 0.0;
            let singular_at_end = norm(b) == 0.0;
            let f = |sigma: f64| {
                let x = [a[0] + sigma * (b[0] - a[0]), a[1] + sigma * (b[1] - a[1])];
                self.at(s0 + sigma * h, &roots, l) * dot(lshape_phi_gradient(x), n)
            };
            let v = if singular_at_start {
                quad.integrate(|tau| 3.0 * tau * tau * f(tau * tau * tau), 0.0, 1.0, &[])?
            } else if singular_at_end {
                quad.integrate(|tau| 3.0 * tau * tau * f(1.0 - tau * tau * tau), 0.0, 1.0, &[])?
            } else {
                let mut breaks = Vec::new();
                if let BemGoalWeight::Characteristic { start, end } = *self {
                    breaks.extend([(start - s0) / h, (end - s0) / h]);
                }
                quad.integrate(f, 0.0, 1.0, &breaks)?
            };
            total += h * v;
        }
        Ok(Reference {
            value: total,
            kind: ReferenceKind::Analytic,
            accuracy: 1e-14,
        })
    }
}
