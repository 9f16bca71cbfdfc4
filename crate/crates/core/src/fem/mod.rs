//! Lagrange finite elements of degree 1 to 3: spaces, assembly of the
//! non-symmetric bilinear form, Dirichlet lifting and sparse direct solves.

mod assembly;
mod basis;
mod data;
mod function;
mod solve;
mod space;

pub use assembly::{assemble_dual, assemble_primal, bilinear_form, load_functional, LinearSystem};
pub use basis::{barycentric_gradients, LagrangeBasis, ShapeValue};
pub use data::{AffineField, EllipticCoefficients, LoadData, Piecewise, ScalarField};
pub use function::{lift_dirichlet, DiscreteFunction, RootTrace};
pub use solve::{solve, solve_dense_spd, solve_sparse, RESIDUAL_TOL};
pub use space::FESpace;
