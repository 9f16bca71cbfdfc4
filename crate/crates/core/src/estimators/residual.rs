use std::sync::Arc;

use rayon::prelude::*;

use super::EstimatorField;
use crate::error::{input, Result};
use crate::fem::{DiscreteFunction, EllipticCoefficients, FESpace, LoadData, ShapeValue};
use crate::quadrature::{LineRule, TriangleRule};

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Primal,
    Dual,
}

/// Shape functions tabulated at the volume rule and at Gauss points on
/// each local edge.
struct Tables {
    rule: TriangleRule,
    volume: Vec<Vec<ShapeValue>>,
    line: LineRule,
    edges: [Vec<Vec<ShapeValue>>; 3],
}

impl Tables {
    fn new(space: &FESpace) -> Self {
        let p = space.degree();
        let rule = TriangleRule::for_degree(2 * p + 2);
        let basis = space.basis();
        let volume = rule.points.iter().map(|&l| basis.eval(l)).collect();
        let line = LineRule::gauss(p + 1);
        let edges = std::array::from_fn(|k| {
            line.nodes
                .iter()
                .map(|&s| {
                    let mut l = [0.0; 3];
                    l[(k + 1) % 3] = 1.0 - s;
                    l[(k + 2) % 3] = s;
                    basis.eval(l)
                })
                .collect()
        });
        Tables {
            rule,
            volume,
            line,
            edges,
        }
    }
}

fn grad_at(shapes: &[ShapeValue], loc: &[f64], gl: &[[f64; 2]; 3]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (s, c) in shapes.iter().zip(loc) {
        let sg = s.gradient(gl);
        g[0] += c * sg[0];
        g[1] += c * sg[1];
    }
    g
}

fn flux(a: &[[f64; 2]; 2], g: [f64; 2], f2: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * g[0] + a[0][1] * g[1] + f2[0],
        a[1][0] * g[0] + a[1][1] * g[1] + f2[1],
    ]
}

fn indicator(
    space: &FESpace,
    tables: &Tables,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    w: &DiscreteFunction,
    side: Side,
    t: usize,
) -> f64 {
    let mesh = space.mesh();
    let root = mesh.root_of(t);
    let area = mesh.area(t);
    let a = coeffs.diffusion.get(root);
    let c = coeffs.reaction.get(root);
    let gl = space.barycentric_gradients(t);
    let loc = w.local(t);

    // volume residual
    let mut vol = 0.0;
    for (q, shapes) in tables.volume.iter().enumerate() {
        let x = space.map_point(t, tables.rule.points[q]);
        let (mut val, mut g, mut adiv) = (0.0, [0.0; 2], 0.0);
        for (s, &cf) in shapes.iter().zip(&loc) {
            let sg = s.gradient(&gl);
            let sh = s.hessian(&gl);
            val += cf * s.value;
            g[0] += cf * sg[0];
            g[1] += cf * sg[1];
            adiv += cf * (a[0][0] * sh[0][0] + a[0][1] * sh[1][0] + a[1][0] * sh[0][1] + a[1][1] * sh[1][1]);
        }
        let b = coeffs.convection.eval(x);
        let bg = b[0] * g[0] + b[1] * g[1];
        let op = match side {
            Side::Primal => -adiv + bg + c * val,
            Side::Dual => -adiv - bg + (c - coeffs.convection.divergence()) * val,
        };
        let r = load.f1.eval(x) - op;
        vol += tables.rule.weights[q] * r * r;
    }
    let h2 = area;
    let mut eta2 = h2 * vol * area;

    // normal jumps of (A grad w + f2)
    let tri = mesh.triangles()[t];
    let x = mesh.coords(t);
    let f2 = load.f2.get(root);
    let nq = tables.line.nodes.len();
    for k in 0..3 {
        let Some((s, ks)) = space.neighbour(t, k) else { continue };
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let e = [x[j][0] - x[i][0], x[j][1] - x[i][1]];
        let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
        // outward for counter-clockwise elements
        let n = [e[1] / len, -e[0] / len];
        let sroot = mesh.root_of(s);
        let (sa, sf2) = (coeffs.diffusion.get(sroot), load.f2.get(sroot));
        let sgl = space.barycentric_gradients(s);
        let sloc = w.local(s);
        let same_direction = mesh.triangles()[s].vertices[(ks + 1) % 3] == tri.vertices[i];
        let mut jump2 = 0.0;
        for q in 0..nq {
            let qs = if same_direction { q } else { nq - 1 - q };
            let ft = flux(&a, grad_at(&tables.edges[k][q], &loc, &gl), f2);
            let fs = flux(&sa, grad_at(&tables.edges[ks][qs], &sloc, &sgl), sf2);
            let jmp = (ft[0] - fs[0]) * n[0] + (ft[1] - fs[1]) * n[1];
            jump2 += tables.line.weights[q] * jmp * jmp;
        }
        eta2 += h2.sqrt() * jump2 * len;
    }
    eta2
}

fn estimate(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    w: &DiscreteFunction,
    side: Side,
) -> Result<EstimatorField> {
    if !Arc::ptr_eq(space, w.space()) && w.coeffs().len() != space.num_dofs() {
        return input("discrete function does not belong to the given space");
    }
    let mesh = space.mesh();
    coeffs.validate(mesh.num_roots())?;
    load.validate(mesh.num_roots())?;
    let tables = Tables::new(space);
    let ind: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| indicator(space, &tables, coeffs, load, w, side, t))
        .collect();
    EstimatorField::new(ind)
}

/// `eta_u(T)^2 = h_T^2 |f1 - L U|^2_T + h_T |[(A grad U + f2) . n]|^2_{dT inside}`.
pub fn eta_primal(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    u: &DiscreteFunction,
) -> Result<EstimatorField> {
    estimate(space, coeffs, load, u, Side::Primal)
}

/// As [`eta_primal`] with the formal adjoint
/// `L' Z = -div(A grad Z) - b . grad Z + (c - div b) Z` and the dual data.
pub fn eta_dual(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    dual_load: &LoadData,
    z: &DiscreteFunction,
) -> Result<EstimatorField> {
    estimate(space, coeffs, dual_load, z, Side::Dual)
}
