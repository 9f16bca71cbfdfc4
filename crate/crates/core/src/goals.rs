//! Goal functionals: volume goals, the weighted boundary flux and goal
//! errors against reference values.

use std::sync::Arc;

use crate::error::{input, Result};
use crate::fem::{bilinear_form, lift_dirichlet, load_functional, DiscreteFunction, EllipticCoefficients, LoadData, RootTrace};

/// How a reference goal value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Goal value of a much finer adaptive computation.
    SelfConvergence,
    /// Quadrature of the analytic solution.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub kind: ReferenceKind,
    /// Estimated accuracy of `value`.
    pub accuracy: f64,
}

/// `g(U) = int g1 U - g2 . grad U`.
pub fn goal_volume(u: &DiscreteFunction, g: &LoadData) -> f64 {
    load_functional(g, u)
}

fn check_trace(z: &DiscreteFunction, lambda: &RootTrace) -> Result<()> {
    let expect = lift_dirichlet(z.space(), lambda)?;
    let scale = expect.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
    for d in 0..z.space().num_dofs() {
        if z.space().is_boundary_dof(d) && (z.coeffs()[d] - expect.coeffs()[d]).abs() > 1e-12 * scale {
            return input(format!("dual solution differs from the flux weight at boundary dof {d}"));
        }
    }
    Ok(())
}

/// Discrete weighted flux `N(U) = -f(Z)` for a homogeneous primal
/// Dirichlet condition. `Z` must carry the weight `lambda` as its trace.
pub fn goal_flux(z: &DiscreteFunction, load: &LoadData, lambda: &RootTrace) -> Result<f64> {
    check_trace(z, lambda)?;
    Ok(-load_functional(load, z))
}

/// Discrete weighted flux with inhomogeneous primal Dirichlet data given by
/// its lifting `u_dir`: `N = a(u_dir, Z) - f(Z)`.
pub fn goal_flux_lifted(
    z: &DiscreteFunction,
    load: &LoadData,
    lambda: &RootTrace,
    coeffs: &EllipticCoefficients,
    u_dir: &DiscreteFunction,
) -> Result<f64> {
    check_trace(z, lambda)?;
    if !Arc::ptr_eq(z.space(), u_dir.space()) && z.coeffs().len() != u_dir.coeffs().len() {
        return input("lifting and dual solution live on different spaces");
    }
    Ok(bilinear_form(coeffs, u_dir, z)? - load_functional(load, z))
}

/// `|reference - value|`, if a reference exists.
pub fn goal_error(value: f64, reference: Option<&Reference>) -> Option<f64> {
    reference.map(|r| (r.value - value).abs())
}

/// Extrapolation of the last three goal values of a converging sequence:
/// returns the limit estimate and the estimated error of the last value.
pub fn richardson(values: [f64; 3]) -> (f64, f64) {
    let d1 = values[1] - values[0];
    let d2 = values[2] - values[1];
    if d1 == 0.0 || d2 == 0.0 {
        return (values[2], d2.abs());
    }
    let q = (d2 / d1).abs();
    if q >= 1.0 {
        return (values[2], d2.abs().max(d1.abs()));
    }
    let tail = d2 * q / (1.0 - q);
    (values[2] + tail, tail.abs())
}
