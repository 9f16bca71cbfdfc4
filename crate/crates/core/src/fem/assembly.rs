use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use super::basis::ShapeValue;
use super::data::{EllipticCoefficients, LoadData};
use super::function::DiscreteFunction;
use super::space::FESpace;
use crate::error::{input, Error, Result};
use crate::quadrature::TriangleRule;

/// Galerkin system on the free dofs.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// Dirichlet part of the solution (zero at free dofs).
    pub lifting: DiscreteFunction,
}

impl LinearSystem {
    pub fn space(&self) -> &Arc<FESpace> {
        self.lifting.space()
    }

    /// Matrix entries as sorted `(row, col, value)` triples.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let m = self.matrix.as_ref();
        let sym = m.symbolic();
        let (cp, ri, val) = (sym.col_ptr(), sym.row_idx(), m.val());
        let mut out = Vec::with_capacity(val.len());
        for c in 0..m.ncols() {
            for k in cp[c]..cp[c + 1] {
                out.push((ri[k], c, val[k]));
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    /// `A x` on the free dofs.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.matrix.as_ref();
        let sym = m.symbolic();
        let (cp, ri, val) = (sym.col_ptr(), sym.row_idx(), m.val());
        let mut y = vec![0.0; m.nrows()];
        for c in 0..m.ncols() {
            for k in cp[c]..cp[c + 1] {
                y[ri[k]] += val[k] * x[c];
            }
        }
        y
    }

    /// `b - A x` accumulated in double-double arithmetic, rounded once.
    pub fn residual_extended(&self, x: &[f64]) -> Vec<f64> {
        let m = self.matrix.as_ref();
        let sym = m.symbolic();
        let (cp, ri, val) = (sym.col_ptr(), sym.row_idx(), m.val());
        let mut acc: Vec<(f64, f64)> = self.rhs.iter().map(|&b| (b, 0.0)).collect();
        for c in 0..m.ncols() {
            for k in cp[c]..cp[c + 1] {
                let p = -val[k] * x[c];
                let pe = (-val[k]).mul_add(x[c], -p);
                let (hi, lo) = &mut acc[ri[k]];
                let s = *hi + p;
                let bp = s - *hi;
                let err = (*hi - (s - bp)) + (p - bp);
                *hi = s;
                *lo += err + pe;
            }
        }
        acc.into_iter().map(|(hi, lo)| hi + lo).collect()
    }
}

fn rule_for(degree: usize) -> TriangleRule {
    TriangleRule::for_degree(2 * degree + 1)
}

/// Shape functions of the space tabulated at the points of a triangle rule.
struct Tabulation {
    pub rule: TriangleRule,
    pub shapes: Vec<Vec<ShapeValue>>,
}

impl Tabulation {
    pub fn new(space: &FESpace, rule: TriangleRule) -> Self {
        let shapes = rule.points.iter().map(|&l| space.basis().eval(l)).collect();
        Tabulation { rule, shapes }
    }
}

/// Value and gradient of one shape function at one point.
type Trial = (f64, [f64; 2]);

/// Integrand of `a(u, v)`: `A grad u . grad v + (b . grad u) v + c u v`.
fn form(a: &[[f64; 2]; 2], b: [f64; 2], c: f64, u: Trial, v: Trial) -> f64 {
    let agu = [
        a[0][0] * u.1[0] + a[0][1] * u.1[1],
        a[1][0] * u.1[0] + a[1][1] * u.1[1],
    ];
    agu[0] * v.1[0] + agu[1] * v.1[1] + (b[0] * u.1[0] + b[1] * u.1[1]) * v.0 + c * u.0 * v.0
}

struct ElementSystem {
    matrix: Vec<f64>,
    load: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Orientation {
    /// Row `i`, column `j` holds `a(phi_j, phi_i)`.
    Primal,
    /// Row `i`, column `j` holds `a(phi_i, phi_j)`.
    Dual,
}

fn element_system(
    space: &FESpace,
    tab: &Tabulation,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    t: usize,
    orientation: Orientation,
) -> ElementSystem {
    let n = space.basis().len();
    let mesh = space.mesh();
    let root = mesh.root_of(t);
    let area = mesh.area(t);
    let gl = space.barycentric_gradients(t);
    let a = coeffs.diffusion.get(root);
    let c = coeffs.reaction.get(root);
    let f2 = load.f2.get(root);
    let mut matrix = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut phi: Vec<Trial> = vec![(0.0, [0.0; 2]); n];
    for (q, shapes) in tab.shapes.iter().enumerate() {
        let w = tab.rule.weights[q] * area;
        let x = space.map_point(t, tab.rule.points[q]);
        let b = coeffs.convection.eval(x);
        let f1 = load.f1.eval(x);
        for (p, s) in phi.iter_mut().zip(shapes) {
            *p = (s.value, s.gradient(&gl));
        }
        for i in 0..n {
            for j in 0..n {
                let v = match orientation {
                    Orientation::Primal => form(&a, b, c, phi[j], phi[i]),
                    Orientation::Dual => form(&a, b, c, phi[i], phi[j]),
                };
                matrix[i * n + j] += w * v;
            }
            rhs[i] += w * (f1 * phi[i].0 - f2[0] * phi[i].1[0] - f2[1] * phi[i].1[1]);
        }
    }
    ElementSystem { matrix, load: rhs }
}

fn assemble(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    dirichlet: Option<&DiscreteFunction>,
    orientation: Orientation,
) -> Result<LinearSystem> {
    let mesh = space.mesh();
    coeffs.validate(mesh.num_roots())?;
    load.validate(mesh.num_roots())?;
    let lifting = match dirichlet {
        Some(g) => {
            if g.coeffs().len() != space.num_dofs() {
                return input("Dirichlet lifting lives on a different space");
            }
            let mut c = g.coeffs().to_vec();
            for &d in space.free_dofs() {
                c[d] = 0.0;
            }
            DiscreteFunction::new(Arc::clone(space), c)?
        }
        None => DiscreteFunction::zeros(Arc::clone(space)),
    };
    let tab = Tabulation::new(space, rule_for(space.degree()));
    let locals: Vec<ElementSystem> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| element_system(space, &tab, coeffs, load, t, orientation))
        .collect();

    let n = space.basis().len();
    let nfree = space.num_free();
    let mut triplets = Vec::with_capacity(mesh.num_elements() * n * n);
    let mut rhs = vec![0.0; nfree];
    let g = lifting.coeffs();
    for (t, local) in locals.iter().enumerate() {
        let dofs = space.element_dofs(t);
        for i in 0..n {
            let Some(fi) = space.free_index(dofs[i]) else { continue };
            rhs[fi] += local.load[i];
            for j in 0..n {
                let v = local.matrix[i * n + j];
                match space.free_index(dofs[j]) {
                    Some(fj) => triplets.push(Triplet::new(fi, fj, v)),
                    None => rhs[fi] -= v * g[dofs[j]],
                }
            }
        }
    }
    let matrix = SparseColMat::try_new_from_triplets(nfree, nfree, &triplets)
        .map_err(|e| Error::Numerical(format!("sparse matrix construction failed: {e:?}")))?;
    Ok(LinearSystem { matrix, rhs, lifting })
}

/// Primal system: `a(U, phi_i) = f(phi_i)` for all free `i`, with `U`
/// fixed to the lifting at Dirichlet dofs.
pub fn assemble_primal(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    load: &LoadData,
    dirichlet: Option<&DiscreteFunction>,
) -> Result<LinearSystem> {
    assemble(space, coeffs, load, dirichlet, Orientation::Primal)
}

/// Dual system: `a(phi_i, Z) = g(phi_i)` for all free `i`.
pub fn assemble_dual(
    space: &Arc<FESpace>,
    coeffs: &EllipticCoefficients,
    dual_load: &LoadData,
    dirichlet: Option<&DiscreteFunction>,
) -> Result<LinearSystem> {
    assemble(space, coeffs, dual_load, dirichlet, Orientation::Dual)
}

/// `a(u, v)` for two functions on the same space.
pub fn bilinear_form(coeffs: &EllipticCoefficients, u: &DiscreteFunction, v: &DiscreteFunction) -> Result<f64> {
    let space = u.space();
    if u.coeffs().len() != v.coeffs().len() {
        return input("functions live on different spaces");
    }
    let tab = Tabulation::new(space, rule_for(space.degree()));
    let mesh = space.mesh();
    let parts: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let root = mesh.root_of(t);
            let (a, c) = (coeffs.diffusion.get(root), coeffs.reaction.get(root));
            let gl = space.barycentric_gradients(t);
            let (lu, lv) = (u.local(t), v.local(t));
            let mut s = 0.0;
            for (q, shapes) in tab.shapes.iter().enumerate() {
                let x = space.map_point(t, tab.rule.points[q]);
                let (mut tu, mut tv) = ((0.0, [0.0; 2]), (0.0, [0.0; 2]));
                for (k, sh) in shapes.iter().enumerate() {
                    let g = sh.gradient(&gl);
                    tu.0 += lu[k] * sh.value;
                    tv.0 += lv[k] * sh.value;
                    for d in 0..2 {
                        tu.1[d] += lu[k] * g[d];
                        tv.1[d] += lv[k] * g[d];
                    }
                }
                s += tab.rule.weights[q] * form(&a, coeffs.convection.eval(x), c, tu, tv);
            }
            s * mesh.area(t)
        })
        .collect();
    Ok(parts.iter().sum())
}

/// `f(v) = int f1 v - f2 . grad v`.
pub fn load_functional(load: &LoadData, v: &DiscreteFunction) -> f64 {
    let space = v.space();
    let tab = Tabulation::new(space, rule_for(space.degree()));
    let mesh = space.mesh();
    let parts: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let f2 = load.f2.get(mesh.root_of(t));
            let gl = space.barycentric_gradients(t);
            let lv = v.local(t);
            let mut s = 0.0;
            for (q, shapes) in tab.shapes.iter().enumerate() {
                let x = space.map_point(t, tab.rule.points[q]);
                let (mut val, mut grad) = (0.0, [0.0; 2]);
                for (k, sh) in shapes.iter().enumerate() {
                    let g = sh.gradient(&gl);
                    val += lv[k] * sh.value;
                    grad[0] += lv[k] * g[0];
                    grad[1] += lv[k] * g[1];
                }
                s += tab.rule.weights[q] * (load.f1.eval(x) * val - f2[0] * grad[0] - f2[1] * grad[1]);
            }
            s * mesh.area(t)
        })
        .collect();
    parts.iter().sum()
}
