//! Residual error estimators for the primal and dual finite element
//! problems.

mod field;
mod residual;

pub use field::EstimatorField;
pub use residual::{eta_dual, eta_primal};
