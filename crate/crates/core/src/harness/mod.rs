//! Experiment registry, rate fitting and CSV output.

mod bem_problems;
mod config;
mod fem_problems;
mod rates;
mod run;

pub use bem_problems::BemProblem;
pub use config::{ExperimentConfig, ProblemId};
pub use fem_problems::{FemGoal, FemProblem, FemSolution};
pub use rates::{fit_points, fit_rate, fit_rate_above, ncum_at_tolerance, Quantity, RateFit};
pub use run::{
    best_ncum, build_problem, fem_reference, layer_fraction, run, sweep, write_boundary_dump, write_history_csv,
    write_history_dat, write_ncum, write_outputs, write_rates, AnyProblem, RunOutput, SweepEntry, HISTORY_HEADER,
    LAYER_WIDTH, REFERENCE_MARGIN,
};
