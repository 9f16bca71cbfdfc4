use std::sync::Arc;

use super::space::FESpace;
use crate::error::{input, Result};
use crate::mesh::{Mesh2, Point};

/// Finite element function: coefficients over all global dofs, including
/// the Dirichlet values.
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    space: Arc<FESpace>,
    coeffs: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(space: Arc<FESpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.num_dofs() {
            return input(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                space.num_dofs()
            ));
        }
        Ok(DiscreteFunction { space, coeffs })
    }

    pub fn zeros(space: Arc<FESpace>) -> Self {
        let n = space.num_dofs();
        DiscreteFunction {
            space,
            coeffs: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(space: Arc<FESpace>, f: impl Fn(Point) -> f64) -> Self {
        let coeffs = (0..space.num_dofs()).map(|d| f(space.dof_point(d))).collect();
        DiscreteFunction { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FESpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Local coefficient vector of element `t`.
    pub fn local(&self, t: usize) -> Vec<f64> {
        self.space.element_dofs(t).iter().map(|&d| self.coeffs[d]).collect()
    }

    /// Value, gradient and Hessian at barycentric point `l` of element `t`.
    pub fn eval(&self, t: usize, l: [f64; 3]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let gl = self.space.barycentric_gradients(t);
        let shapes = self.space.basis().eval(l);
        let (mut v, mut g, mut h) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
        for (s, &d) in shapes.iter().zip(self.space.element_dofs(t)) {
            let c = self.coeffs[d];
            v += c * s.value;
            let sg = s.gradient(&gl);
            let sh = s.hessian(&gl);
            for i in 0..2 {
                g[i] += c * sg[i];
                for j in 0..2 {
                    h[i][j] += c * sh[i][j];
                }
            }
        }
        (v, g, h)
    }

    /// Linear combination `a * self + b * other` on the same space.
    pub fn axpby(&self, a: f64, other: &DiscreteFunction, b: f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.coeffs.len() != other.coeffs.len() {
            return input("functions live on different spaces");
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        Ok(DiscreteFunction {
            space: Arc::clone(&self.space),
            coeffs,
        })
    }
}

/// Dirichlet trace that is a polynomial of some degree on every boundary
/// edge of the initial mesh.
#[derive(Debug, Clone)]
pub struct RootTrace {
    degree: usize,
    edges: Vec<(Point, Point)>,
    values: Vec<Vec<f64>>,
}

impl RootTrace {
    /// Homogeneous trace on every root boundary edge of `mesh`.
    pub fn zero(mesh: &Mesh2) -> Self {
        let n = mesh.num_root_boundary_edges();
        RootTrace {
            degree: 1,
            edges: (0..n).map(|l| mesh.root_boundary_edge(l).unwrap()).collect(),
            values: vec![vec![0.0; 2]; n],
        }
    }

    /// Samples `f` on each root boundary edge at `degree + 1` equispaced
    /// points. Fails if `f` is not a polynomial of that degree on some edge.
    pub fn from_fn(mesh: &Mesh2, degree: usize, f: impl Fn(Point) -> f64) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return input(format!("trace degree {degree} not in 1..=3"));
        }
        let n = mesh.num_root_boundary_edges();
        let mut edges = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for label in 0..n {
            let (a, b) = mesh.root_boundary_edge(label).unwrap();
            let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let v: Vec<f64> = (0..=degree).map(|k| f(at(k as f64 / degree as f64))).collect();
            let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for t in [0.13, 0.37, 0.61, 0.89] {
                let exact = f(at(t));
                if (lagrange_1d(&v, t) - exact).abs() > 1e-11 * scale {
                    return input(format!(
                        "trace is not a degree-{degree} polynomial on root boundary edge {label}"
                    ));
                }
            }
            edges.push((a, b));
            values.push(v);
        }
        Ok(RootTrace { degree, edges, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Trace value at `x` on root boundary edge `label`.
    pub fn eval(&self, label: usize, x: Point) -> f64 {
        let (a, b) = self.edges[label];
        let d = [b[0] - a[0], b[1] - a[1]];
        let t = ((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]);
        lagrange_1d(&self.values[label], t)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0)
    }
}

/// Interpolant through `(k / d, v[k])`, `d = v.len() - 1`, evaluated at `t`.
fn lagrange_1d(v: &[f64], t: f64) -> f64 {
    let d = (v.len() - 1) as f64;
    let nodes: Vec<f64> = (0..v.len()).map(|k| k as f64 / d).collect();
    let mut s = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i {
                w *= (t - xj) / (nodes[i] - xj);
            }
        }
        s += vi * w;
    }
    s
}

/// Zero extension of the boundary trace: the trace at boundary dofs, zero
/// at every other dof.
pub fn lift_dirichlet(space: &Arc<FESpace>, trace: &RootTrace) -> Result<DiscreteFunction> {
    if trace.num_edges() != space.mesh().num_root_boundary_edges() {
        return input("trace belongs to a different initial mesh");
    }
    if trace.degree() > space.degree() && !trace.is_zero() {
        return input(format!(
            "degree-{} trace is not representable in a degree-{} space",
            trace.degree(),
            space.degree()
        ));
    }
    let mut coeffs = vec![0.0; space.num_dofs()];
    for (d, c) in coeffs.iter_mut().enumerate() {
        if let Some(label) = space.boundary_label(d) {
            *c = trace.eval(label, space.dof_point(d));
        }
    }
    DiscreteFunction::new(Arc::clone(space), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Arc<Mesh2> {
        Arc::new(Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, n, n).unwrap())
    }

    #[test]
    fn zero_trace_lifts_to_zero() {
        let m = unit_square(2);
        let s = Arc::new(FESpace::new(m.clone(), 2).unwrap());
        let w = lift_dirichlet(&s, &RootTrace::zero(&m)).unwrap();
        assert!(w.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn piecewise_linear_pulse_is_exact_at_boundary_nodes() {
        let m = unit_square(6);
        let pulse = |x: Point| {
            if x[1] != 0.0 {
                0.0
            } else {
                let s = x[0];
                if s <= 1.0 / 6.0 {
                    0.0
                } else if s <= 1.0 / 3.0 {
                    6.0 * (s - 1.0 / 6.0)
                } else if s <= 0.5 {
                    6.0 * (0.5 - s)
                } else {
                    0.0
                }
            }
        };
        let trace = RootTrace::from_fn(&m, 1, pulse).unwrap();
        let refined = Arc::new(m.refine_uniform().unwrap());
        let s = Arc::new(FESpace::new(refined, 3).unwrap());
        let w = lift_dirichlet(&s, &trace).unwrap();
        for d in 0..s.num_dofs() {
            let expect = if s.is_boundary_dof(d) { pulse(s.dof_point(d)) } else { 0.0 };
            assert!((w.coeffs()[d] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn unrepresentable_trace_rejected() {
        let m = unit_square(1);
        assert!(RootTrace::from_fn(&m, 1, |x| x[0] * x[0]).is_err());
        let t = RootTrace::from_fn(&m, 2, |x| x[0] * x[0]).unwrap();
        let s1 = Arc::new(FESpace::new(m.clone(), 1).unwrap());
        assert!(lift_dirichlet(&s1, &t).is_err());
        let s2 = Arc::new(FESpace::new(m, 2).unwrap());
        assert!(lift_dirichlet(&s2, &t).is_ok());
    }

    #[test]
    fn hat_trace_lifts_to_hat() {
        let m = unit_square(2);
        let z0 = [0.5, 0.0];
        let hat = |x: Point| if x[1] == 0.0 { (1.0 - 2.0 * (x[0] - z0[0]).abs()).max(0.0) } else { 0.0 };
        let trace = RootTrace::from_fn(&m, 1, hat).unwrap();
        let s = Arc::new(FESpace::new(m.clone(), 1).unwrap());
        let w = lift_dirichlet(&s, &trace).unwrap();
        for d in 0..s.num_dofs() {
            let p = s.dof_point(d);
            let expect = if p == z0 { 1.0 } else { 0.0 };
            assert_eq!(w.coeffs()[d], expect);
        }
    }
}
