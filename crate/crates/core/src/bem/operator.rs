use std::collections::HashMap;
use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use super::kernel::{dot, log_potential, norm, self_log_integral, sub};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryMesh, Panel, Point};
use crate::quadrature::{Adaptive, LineRule};

/// Far pairs are separated by at least this many lengths of the shorter panel.
const FAR: f64 = 2.0;
const FAR_POINTS: usize = 8;

/// Dense Galerkin matrix of the single-layer operator for piecewise
/// constants, `V_ij = -1/(2 pi) int_Ti int_Tj ln|x - y|`.
#[derive(Debug, Clone)]
pub struct SingleLayer {
    pub matrix: Mat<f64>,
    keys: Vec<Panel>,
}

fn point_segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let e = sub(b, a);
    let s = (dot(sub(x, a), e) / dot(e, e)).clamp(0.0, 1.0);
    norm(sub(x, [a[0] + s * e[0], a[1] + s * e[1]]))
}

fn segment_distance(a: (Point, Point), b: (Point, Point)) -> f64 {
    point_segment_distance(a.0, b.0, b.1)
        .min(point_segment_distance(a.1, b.0, b.1))
        .min(point_segment_distance(b.0, a.0, a.1))
        .min(point_segment_distance(b.1, a.0, a.1))
}

/// Outer Gauss rule on the panel `a + s h t`, `0 < s < 1`.
fn far_pair(a: Point, h: f64, t: Point, inner: (Point, Point), gauss: &LineRule) -> f64 {
    h * gauss.integrate(0.0, 1.0, |s| log_potential(inner.0, inner.1, [a[0] + s * h * t[0], a[1] + s * h * t[1]]))
}

fn near_pair(outer: (Point, Point), inner: (Point, Point), h: f64) -> Result<f64> {
    let quad = Adaptive {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        max_intervals: 2000,
    };
    // each half of the outer panel in coordinates centred at its endpoint
    let half = |o: Point, e: Point| {
        let (a, b) = (sub(inner.0, o), sub(inner.1, o));
        quad.integrate(|s| log_potential(a, b, [s * e[0], s * e[1]]), 0.0, 0.5, &[])
    };
    Ok(h * (half(outer.0, sub(outer.1, outer.0))? + half(outer.1, sub(outer.0, outer.1))?))
}

/// `int_Ti int_Tj ln|x - y|` on a mesh. Near pairs are integrated in the
/// frame of the shorter panel, far pairs in the frame of the longer one.
fn mesh_pair(mesh: &BoundaryMesh, i: usize, j: usize, gauss: &LineRule) -> Result<f64> {
    let (short, long) = if mesh.element_size(i) <= mesh.element_size(j) { (i, j) } else { (j, i) };
    let h = mesh.element_size(short);
    let o = mesh.panel_origin(short);
    let (ps, pl) = (mesh.endpoints_in(short, o), mesh.endpoints_in(long, o));
    if segment_distance(ps, pl) < FAR * h {
        return near_pair(ps, pl, h);
    }
    let o = mesh.panel_origin(long);
    let a = mesh.node_in(short, o);
    Ok(far_pair(a, h, mesh.tangent(short), mesh.endpoints_in(long, o), gauss))
}

/// Single entry of the Galerkin matrix.
pub fn single_layer_entry(mesh: &BoundaryMesh, i: usize, j: usize) -> Result<f64> {
    let v = if i == j {
        self_log_integral(mesh.element_size(i))
    } else {
        mesh_pair(mesh, i, j, &LineRule::gauss(FAR_POINTS))?
    };
    Ok(-v / (2.0 * PI))
}

impl SingleLayer {
    /// Assembles the matrix on `mesh`. Entries between panels that already
    /// exist in `previous` are copied from it.
    pub fn assemble(mesh: &BoundaryMesh, previous: Option<&SingleLayer>) -> Result<SingleLayer> {
        let diam = mesh.diameter();
        if diam >= 1.0 {
            return Err(Error::Config(format!(
                "boundary diameter {diam} is not below 1; the single-layer form is not elliptic"
            )));
        }
        let n = mesh.num_panels();
        let keys: Vec<Panel> = (0..n).map(|i| mesh.panel_key(i)).collect();
        let old: Vec<Option<usize>> = match previous {
            Some(prev) => {
                let index: HashMap<Panel, usize> = prev.keys.iter().enumerate().map(|(k, p)| (*p, k)).collect();
                keys.iter().map(|p| index.get(p).copied()).collect()
            }
            None => vec![None; n],
        };
        let gauss = LineRule::gauss(FAR_POINTS);
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| -> Result<Vec<f64>> {
                let mut col = Vec::with_capacity(j + 1);
                for i in 0..=j {
                    let v = match (old[i], old[j], previous) {
                        (Some(oi), Some(oj), Some(prev)) => prev.matrix[(oi, oj)],
                        _ if i == j => -self_log_integral(mesh.element_size(i)) / (2.0 * PI),
                        _ => -mesh_pair(mesh, i, j, &gauss)? / (2.0 * PI),
                    };
                    col.push(v);
                }
                Ok(col)
            })
            .collect::<Result<_>>()?;
        let matrix = Mat::from_fn(n, n, |i, j| if i <= j { columns[j][i] } else { columns[i][j] });
        Ok(SingleLayer { matrix, keys })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// `V x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum()).collect()
    }
}
