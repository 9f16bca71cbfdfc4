use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::kernel::{cross, dipole_segment, dot, log_potential, norm, sub};
use crate::error::Result;
use crate::mesh::{BoundaryMesh, Panel, Point};
use crate::quadrature::{Adaptive, LineRule};

/// Right-hand side data `F` of a single-layer equation on a boundary mesh.
pub trait BoundaryData: Sync {
    /// `int_Ti F ds`.
    fn panel_integral(&self, mesh: &BoundaryMesh, i: usize) -> Result<f64>;

    /// Arclength derivative of `F` at the point `a + s (b - a)` of panel
    /// `i = [a, b]`, `0 < s < 1`.
    fn derivative(&self, mesh: &BoundaryMesh, i: usize, s: f64) -> Result<f64>;

    /// Derivatives at the parameters `nodes` of panel `i`.
    fn derivatives(&self, mesh: &BoundaryMesh, i: usize, nodes: &[f64]) -> Result<Vec<f64>> {
        nodes.iter().map(|&s| self.derivative(mesh, i, s)).collect()
    }
}

/// Smooth function on the boundary together with its gradient in the plane.
#[derive(Clone)]
pub struct TraceFunction {
    value: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    gradient: Arc<dyn Fn(Point) -> Point + Send + Sync>,
}

impl fmt::Debug for TraceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TraceFunction")
    }
}

impl TraceFunction {
    pub fn new(
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        TraceFunction {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: Point) -> Point {
        (self.gradient)(x)
    }
}

/// `int_c^d f ds` over a segment of the initial mesh. `f` receives the
/// point `y` twice: absolute, and relative to the frame origin `o`. Each
/// half is parametrized from its own endpoint, so offsets to a corner keep
/// full precision.
fn segment_integral(quad: &Adaptive, c: Point, d: Point, o: Point, f: impl Fn(Point, Point) -> f64) -> Result<f64> {
    segment_integral_breaks(quad, c, d, o, &[], f)
}

/// [`segment_integral`] with kinks of `f` at the parameters `breaks` in `(0, 1)`.
fn segment_integral_breaks(
    quad: &Adaptive,
    c: Point,
    d: Point,
    o: Point,
    breaks: &[f64],
    f: impl Fn(Point, Point) -> f64,
) -> Result<f64> {
    let h = norm(sub(d, c));
    let first: Vec<f64> = breaks.iter().copied().filter(|&s| s < 0.5).collect();
    let second: Vec<f64> = breaks.iter().filter(|&&s| s > 0.5).map(|s| 1.0 - s).collect();
    let half = |p: Point, e: Point, br: &[f64]| {
        let q = sub(p, o);
        quad.integrate(
            |s| {
                let v = [s * e[0], s * e[1]];
                f(add(p, v), add(q, v))
            },
            0.0,
            0.5,
            br,
        )
    };
    Ok(h * (half(c, sub(d, c), &first)? + half(d, sub(c, d), &second)?))
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn unit(a: Point, b: Point) -> Point {
    let e = sub(b, a);
    let l = norm(e);
    [e[0] / l, e[1] / l]
}

/// True if `[a, b]` lies on the line through the longer segment `[c, d]`.
fn collinear(a: Point, b: Point, c: Point, d: Point) -> bool {
    let t = unit(c, d);
    let scale = norm(sub(d, c));
    cross(t, sub(a, c)).abs() <= 1e-13 * scale && cross(t, sub(b, c)).abs() <= 1e-13 * scale
}

/// `F = (K + 1/2) phi` with the double-layer operator
/// `K phi(x) = 1/(2 pi) int (x - y) . n_y / |x - y|^2 phi(y) ds_y`.
/// `geometry` is the initial mesh; `phi` is given with its extension into the
/// plane, which must be harmonic inside and smooth on each panel of `geometry`.
#[derive(Debug, Clone)]
pub struct DirichletData {
    pub phi: TraceFunction,
    geometry: BoundaryMesh,
    quad: Adaptive,
}

impl DirichletData {
    pub fn new(phi: TraceFunction, geometry: BoundaryMesh) -> Self {
        DirichletData {
            phi,
            geometry,
            quad: Adaptive {
                abs_tol: 1e-15,
                rel_tol: 1e-12,
                max_intervals: 4000,
            },
        }
    }

    /// `(K phi)(x)` by adaptive quadrature; `x` must not be a corner.
    pub fn double_layer(&self, x: Point) -> Result<f64> {
        let mut sum = 0.0;
        for r in 0..self.geometry.num_panels() {
            let (a, b) = self.geometry.endpoints(r);
            let n = self.geometry.normal(r);
            if collinear(x, x, a, b) {
                continue;
            }
            sum += segment_integral(&self.quad, a, b, x, |y, r| {
                let w = [-r[0], -r[1]];
                dot(w, n) / dot(w, w) * self.phi.value(y)
            })?;
        }
        Ok(sum / (2.0 * PI))
    }
}

impl DirichletData {
    /// `int_Ti (K + 1/2) phi` through the double-layer kernel.
    pub fn double_layer_integral(&self, mesh: &BoundaryMesh, i: usize) -> Result<f64> {
        let o = mesh.root_vertex(mesh.panel_origin(i));
        let (a, b) = mesh.endpoints_in(i, mesh.panel_origin(i));
        let quad = Adaptive {
            abs_tol: 1e-16,
            ..self.quad
        };
        let half = 0.5 * segment_integral(&quad, add(o, a), add(o, b), o, |y, _| self.phi.value(y))?;
        // int_Ti K phi = 1/(2 pi) int_Gamma phi(y) int_Ti (x - y) . n_y / |x - y|^2 ds_x ds_y
        let mut dl = 0.0;
        for r in 0..self.geometry.num_panels() {
            let (c, d) = self.geometry.endpoints(r);
            if collinear(a, b, sub(c, o), sub(d, o)) {
                continue;
            }
            let n = self.geometry.normal(r);
            dl += segment_integral(&quad, c, d, o, |y, q| self.phi.value(y) * dipole_segment(a, b, q, n))?;
        }
        Ok(half + dl / (2.0 * PI))
    }
}

impl BoundaryData for DirichletData {
    /// `int_Ti V(d_n phi)`, equal to `int_Ti (K + 1/2) phi` for harmonic `phi`
    /// and free of the cancellation of the double-layer form on small panels.
    fn panel_integral(&self, mesh: &BoundaryMesh, i: usize) -> Result<f64> {
        let o = mesh.root_vertex(mesh.panel_origin(i));
        let (a, b) = mesh.endpoints_in(i, mesh.panel_origin(i));
        let quad = Adaptive {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_intervals: 4000,
        };
        let mut sum = 0.0;
        for r in 0..self.geometry.num_panels() {
            let (c, d) = self.geometry.endpoints(r);
            let n = self.geometry.normal(r);
            let (c, d, cr, dr) = (c, d, sub(c, o), sub(d, o));
            let breaks: Vec<f64> = if collinear(a, b, cr, dr) {
                let e = sub(dr, cr);
                let l2 = dot(e, e);
                [a, b].iter().map(|&x| dot(sub(x, cr), e) / l2).filter(|&s| s > 0.0 && s < 1.0).collect()
            } else {
                Vec::new()
            };
            sum += segment_integral_breaks(&quad, c, d, o, &breaks, |y, q| {
                dot(self.phi.gradient(y), n) * log_potential(a, b, q)
            })?;
        }
        Ok(-sum / (2.0 * PI))
    }

    fn derivative(&self, mesh: &BoundaryMesh, i: usize, s: f64) -> Result<f64> {
        // d/ds (K phi)(x) = 1/(2 pi) int (x - y) . n_x / |x - y|^2 phi'(y) ds_y
        let o = mesh.root_vertex(mesh.panel_origin(i));
        let (a, b) = mesh.endpoints_in(i, mesh.panel_origin(i));
        let xr = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let x = add(o, xr);
        let t = mesh.tangent(i);
        let nx = mesh.normal(i);
        let mut sum = 0.0;
        for r in 0..self.geometry.num_panels() {
            let (c, d) = self.geometry.endpoints(r);
            if collinear(a, b, sub(c, o), sub(d, o)) {
                continue;
            }
            let tr = self.geometry.tangent(r);
            let quad = Adaptive {
                abs_tol: 1e-13,
                ..self.quad
            };
            sum += segment_integral(&quad, c, d, o, |y, q| {
                let w = sub(xr, q);
                dot(w, nx) / dot(w, w) * dot(self.phi.gradient(y), tr)
            })?;
        }
        Ok(0.5 * dot(self.phi.gradient(x), t) + sum / (2.0 * PI))
    }
}

/// Continuous piecewise linear data given by its values at the nodes of the
/// mesh it is evaluated on.
#[derive(Debug, Clone)]
pub struct NodalData {
    pub values: Vec<f64>,
}

impl BoundaryData for NodalData {
    fn panel_integral(&self, mesh: &BoundaryMesh, i: usize) -> Result<f64> {
        let n = mesh.num_panels();
        Ok(0.5 * mesh.element_size(i) * (self.values[i] + self.values[(i + 1) % n]))
    }

    fn derivative(&self, mesh: &BoundaryMesh, i: usize, _s: f64) -> Result<f64> {
        let n = mesh.num_panels();
        Ok((self.values[(i + 1) % n] - self.values[i]) / mesh.element_size(i))
    }
}

/// Memoizes panel integrals and derivatives of mesh-independent data by
/// panel identity.
pub struct CachedData<D> {
    pub inner: D,
    integrals: Mutex<HashMap<Panel, f64>>,
    derivatives: Mutex<HashMap<(Panel, usize), Vec<f64>>>,
}

impl<D: fmt::Debug> fmt::Debug for CachedData<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CachedData").field("inner", &self.inner).finish()
    }
}

impl<D> CachedData<D> {
    pub fn new(inner: D) -> Self {
        CachedData {
            inner,
            integrals: Mutex::new(HashMap::new()),
            derivatives: Mutex::new(HashMap::new()),
        }
    }
}

impl<D: BoundaryData> BoundaryData for CachedData<D> {
    fn panel_integral(&self, mesh: &BoundaryMesh, i: usize) -> Result<f64> {
        let key = mesh.panel_key(i);
        if let Some(v) = self.integrals.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = self.inner.panel_integral(mesh, i)?;
        self.integrals.lock().unwrap().insert(key, v);
        Ok(v)
    }

    fn derivative(&self, mesh: &BoundaryMesh, i: usize, s: f64) -> Result<f64> {
        self.inner.derivative(mesh, i, s)
    }

    fn derivatives(&self, mesh: &BoundaryMesh, i: usize, nodes: &[f64]) -> Result<Vec<f64>> {
        let key = (mesh.panel_key(i), nodes.len());
        if let Some(v) = self.derivatives.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.inner.derivatives(mesh, i, nodes)?;
        self.derivatives.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

/// Gauss nodes on `[0, 1]` used for all estimator evaluations.
pub fn estimator_rule() -> LineRule {
    LineRule::gauss(super::ESTIMATOR_POINTS)
}
