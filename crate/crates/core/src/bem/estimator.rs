use std::f64::consts::PI;

use rayon::prelude::*;

use super::data::{estimator_rule, BoundaryData};
use crate::error::{input, Result};
use crate::estimators::EstimatorField;
use crate::mesh::{BoundaryMesh, Point};

/// Which of the two rescaled estimators to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemSide {
    /// Weight `h^(1 - epsilon)`.
    Primal,
    /// Weight `h^(1 + epsilon)`.
    Dual,
}

impl BemSide {
    pub fn exponent(self, epsilon: f64) -> f64 {
        match self {
            BemSide::Primal => 1.0 - epsilon,
            BemSide::Dual => 1.0 + epsilon,
        }
    }
}

struct Segment {
    a: Point,
    h: f64,
    t: Point,
    nu: Point,
}

/// All panels in coordinates centred at initial vertex `origin`.
fn segments(mesh: &BoundaryMesh, origin: usize) -> Vec<Segment> {
    (0..mesh.num_panels())
        .map(|j| {
            let t = mesh.tangent(j);
            Segment {
                a: mesh.node_in(j, origin),
                h: mesh.element_size(j),
                t,
                nu: [t[1], -t[0]],
            }
        })
        .collect()
}

/// Point `a + s (b - a)` of panel `i` in its own frame.
fn panel_point(mesh: &BoundaryMesh, i: usize, s: f64) -> Point {
    let (a, b) = mesh.endpoints_in(i, mesh.panel_origin(i));
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// `d/ds (V w_k)(x)` along the direction `t` for every coefficient vector
/// `w_k`, summed in panel order.
fn single_layer_derivatives<const K: usize>(segs: &[Segment], w: [&[f64]; K], x: Point, t: Point) -> [f64; K] {
    let mut acc = [0.0; K];
    for (j, s) in segs.iter().enumerate() {
        let r = [x[0] - s.a[0], x[1] - s.a[1]];
        let p = r[0] * s.t[0] + r[1] * s.t[1];
        let d = r[0] * s.nu[0] + r[1] * s.nu[1];
        let d2 = d * d;
        let far2 = (p - s.h) * (p - s.h) + d2;
        let x = s.h * (2.0 * p - s.h) / far2;
        let tang = 0.5 * if x.abs() < 0.5 { x.ln_1p() } else { ((p * p + d2) / far2).ln() };
        let tn = t[0] * s.nu[0] + t[1] * s.nu[1];
        let normal = if tn == 0.0 { 0.0 } else { tn * (d * s.h).atan2(d2 + p * (p - s.h)) };
        let k = tang * (t[0] * s.t[0] + t[1] * s.t[1]) + normal;
        for m in 0..K {
            acc[m] += w[m][j] * k;
        }
    }
    acc.map(|v| -v / (2.0 * PI))
}

/// Tangential derivative of `V w` at the point `a + s (b - a)` of panel
/// `i = [a, b]`.
pub fn single_layer_derivative(mesh: &BoundaryMesh, w: &[f64], i: usize, s: f64) -> f64 {
    let segs = segments(mesh, mesh.panel_origin(i));
    single_layer_derivatives(&segs, [w], panel_point(mesh, i, s), mesh.tangent(i))[0]
}

fn check(mesh: &BoundaryMesh, w: &[f64], epsilon: f64) -> Result<()> {
    if w.len() != mesh.num_panels() {
        return input(format!("{} coefficients on a mesh of {} panels", w.len(), mesh.num_panels()));
    }
    if !(epsilon >= 0.0 && epsilon < 1.0) {
        return input(format!("rescaling parameter {epsilon} outside [0, 1)"));
    }
    Ok(())
}

fn estimate<const K: usize>(
    mesh: &BoundaryMesh,
    w: [&[f64]; K],
    data: [&dyn BoundaryData; K],
    exponents: [f64; K],
) -> Result<[Vec<f64>; K]> {
    let frames: Vec<Vec<Segment>> = (0..mesh.num_roots()).map(|o| segments(mesh, o)).collect();
    let rule = estimator_rule();
    let rows: Vec<[f64; K]> = (0..mesh.num_panels())
        .into_par_iter()
        .map(|i| -> Result<[f64; K]> {
            let segs = &frames[mesh.panel_origin(i)];
            let t = mesh.tangent(i);
            let h = mesh.element_size(i);
            let mut fprime = Vec::with_capacity(K);
            for d in data {
                fprime.push(d.derivatives(mesh, i, &rule.nodes)?);
            }
            let mut sq = [0.0; K];
            for (q, (&s, &wq)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let v = single_layer_derivatives(segs, w, panel_point(mesh, i, s), t);
                for m in 0..K {
                    let r = v[m] - fprime[m][q];
                    sq[m] += wq * h * r * r;
                }
            }
            let mut out = [0.0; K];
            for m in 0..K {
                out[m] = h.powf(exponents[m]) * sq[m];
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(std::array::from_fn(|m| rows.iter().map(|r| r[m]).collect()))
}

/// Weighted-residual indicators `h^(1 -+ epsilon) |d/ds (V w - F)|^2_{L2(T)}`.
pub fn eta_bem(
    mesh: &BoundaryMesh,
    w: &[f64],
    data: &dyn BoundaryData,
    epsilon: f64,
    side: BemSide,
) -> Result<EstimatorField> {
    check(mesh, w, epsilon)?;
    let [v] = estimate(mesh, [w], [data], [side.exponent(epsilon)])?;
    EstimatorField::new(v)
}

/// Primal and dual indicators in one pass over the kernel.
pub fn eta_bem_pair(
    mesh: &BoundaryMesh,
    u: &[f64],
    f: &dyn BoundaryData,
    z: &[f64],
    g: &dyn BoundaryData,
    epsilon: f64,
) -> Result<(EstimatorField, EstimatorField)> {
    check(mesh, u, epsilon)?;
    check(mesh, z, epsilon)?;
    let [eu, ez] = estimate(
        mesh,
        [u, z],
        [f, g],
        [BemSide::Primal.exponent(epsilon), BemSide::Dual.exponent(epsilon)],
    )?;
    Ok((EstimatorField::new(eu)?, EstimatorField::new(ez)?))
}
