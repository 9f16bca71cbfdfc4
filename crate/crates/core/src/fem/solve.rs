use faer::prelude::*;
use faer::Mat;

use super::assembly::LinearSystem;
use super::function::DiscreteFunction;
use crate::error::{Error, Result};

/// Relative residual required of every solve.
pub const RESIDUAL_TOL: f64 = 1e-12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse LU solve of `A x = b` with iterative refinement. Fails unless
/// `|Ax - b| <= RESIDUAL_TOL |b|`.
pub fn solve_sparse(system: &LinearSystem) -> Result<Vec<f64>> {
    let n = system.rhs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = system
        .matrix
        .sp_lu()
        .map_err(|e| Error::Numerical(format!("sparse LU failed on a {n}x{n} system: {e:?}")))?;
    let bnorm = norm(&system.rhs);
    let rhs = Mat::from_fn(n, 1, |i, _| system.rhs[i]);
    let sol = lu.solve(&rhs);
    let mut x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("LU produced non-finite values on a {n}x{n} system")));
    }
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // refinement with an extended precision residual until the correction
    // reaches rounding level
    let mut r = system.residual_extended(&x);
    let mut rel = norm(&r) / bnorm;
    for _ in 0..6 {
        let corr = lu.solve(&Mat::from_fn(n, 1, |i, _| r[i]));
        let dx = norm(&(0..n).map(|i| corr[(i, 0)]).collect::<Vec<_>>());
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += corr[(i, 0)];
        }
        r = system.residual_extended(&x);
        rel = norm(&r) / bnorm;
        if !(dx > 4.0 * f64::EPSILON * norm(&x)) {
            break;
        }
    }
    if rel <= RESIDUAL_TOL {
        return Ok(x);
    }
    Err(Error::Numerical(format!(
        "relative residual {rel:e} above {RESIDUAL_TOL:e} on a {n}x{n} system (ill-conditioned)"
    )))
}

/// Solves the Galerkin system and adds the Dirichlet lifting.
pub fn solve(system: &LinearSystem) -> Result<DiscreteFunction> {
    let x = solve_sparse(system)?;
    let space = system.space();
    let mut coeffs = system.lifting.coeffs().to_vec();
    for (k, &d) in space.free_dofs().iter().enumerate() {
        coeffs[d] = x[k];
    }
    DiscreteFunction::new(std::sync::Arc::clone(space), coeffs)
}

/// Dense symmetric positive definite solve by Cholesky.
pub fn solve_dense_spd(matrix: &Mat<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let llt = matrix
        .llt(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Cholesky failed on a {n}x{n} matrix: {e:?}")))?;
    let sol = llt.solve(Mat::from_fn(n, 1, |i, _| rhs[i]));
    Ok((0..n).map(|i| sol[(i, 0)]).collect())
}
