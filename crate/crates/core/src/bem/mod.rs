//! Lowest-order Galerkin boundary elements for the weakly singular
//! single-layer equation in 2D, with weighted-residual estimators and the
//! L-shaped benchmark.

mod data;
mod estimator;
pub mod kernel;
mod lshape;
mod operator;
#[cfg(test)]
mod tests;

pub use data::{BoundaryData, CachedData, DirichletData, NodalData, TraceFunction};
pub use estimator::{eta_bem, eta_bem_pair, single_layer_derivative, BemSide};
pub use lshape::{
    lshape_dirichlet, lshape_exact, lshape_mesh, lshape_nodes, lshape_phi, lshape_phi_gradient, BemGoalWeight,
};
pub use operator::{single_layer_entry, SingleLayer};

/// Gauss points per panel in the estimator integrals.
pub const ESTIMATOR_POINTS: usize = 4;

use faer::linalg::solvers::Solve;

use crate::error::{Error, Result};

/// Diagonally scaled Cholesky solve of `V x = b` with one refinement step and
/// a relative residual check.
pub fn solve_single_layer(v: &SingleLayer, rhs: &[f64]) -> Result<Vec<f64>> {
    // diagonal scaling keeps graded meshes well conditioned
    let n = v.len();
    let d: Vec<f64> = (0..n).map(|i| v.matrix[(i, i)].sqrt().recip()).collect();
    let scaled = faer::Mat::from_fn(n, n, |i, j| d[i] * v.matrix[(i, j)] * d[j]);
    let llt = scaled
        .llt(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Cholesky failed on a {n}x{n} matrix: {e:?}")))?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let y = llt.solve(faer::Mat::from_fn(n, 1, |i, _| d[i] * b[i]));
        (0..n).map(|i| d[i] * y[(i, 0)]).collect()
    };
    let scaled_residual = |x: &[f64]| -> Vec<f64> { v.apply(x).iter().zip(rhs).zip(&d).map(|((a, b), di)| di * (b - a)).collect() };
    let mut x = solve(rhs);
    let r: Vec<f64> = scaled_residual(&x).iter().zip(&d).map(|(r, di)| r / di).collect();
    for (xi, ci) in x.iter_mut().zip(solve(&r)) {
        *xi += ci;
    }
    let num = scaled_residual(&x).iter().map(|r| r * r).sum::<f64>().sqrt();
    let den = rhs.iter().zip(&d).map(|(b, di)| (di * b).powi(2)).sum::<f64>().sqrt();
    if !(num <= 1e-10 * den) {
        return Err(Error::Numerical(format!("Galerkin residual {:e} above 1e-10", num / den)));
    }
    Ok(x)
}

/// Piecewise constant Galerkin solution for data `F`.
pub fn solve_bem(mesh: &crate::mesh::BoundaryMesh, v: &SingleLayer, data: &dyn BoundaryData) -> Result<Vec<f64>> {
    let rhs = rhs_vector(mesh, data)?;
    solve_single_layer(v, &rhs)
}

/// `(int_Ti F ds)_i`.
pub fn rhs_vector(mesh: &crate::mesh::BoundaryMesh, data: &dyn BoundaryData) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..mesh.num_panels()).into_par_iter().map(|i| data.panel_integral(mesh, i)).collect()
}
