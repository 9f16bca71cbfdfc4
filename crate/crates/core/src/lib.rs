//! Goal-oriented adaptive finite and boundary element methods.
//!
//! The crate drives the product of a primal and a dual residual error
//! estimator to zero. It contains
//!
//! * [`mesh`]: conforming triangulations refined by newest-vertex bisection,
//!   the overlay of two refinements, and boundary meshes refined by 1D
//!   bisection with a bounded local mesh ratio,
//! * [`fem`]: Lagrange elements of degree 1 to 3 for non-symmetric
//!   second-order elliptic operators,
//! * [`estimators`]: residual error indicators for primal and dual problems,
//! * [`marking`]: Dörfler marking and the three goal-oriented selection rules
//!   together with the adaptive loop,
//! * [`goals`]: goal functionals (volume and boundary flux),
//! * [`bem`]: lowest-order Galerkin BEM for the weakly-singular integral
//!   equation with weighted-residual estimators,
//! * [`harness`]: experiment registry, rate fits and CSV output.

pub mod bem;
pub mod error;
pub mod estimators;
pub mod fem;
pub mod goals;
pub mod harness;
pub mod marking;
pub mod mesh;
pub mod quadrature;

pub use error::{Error, Result};
