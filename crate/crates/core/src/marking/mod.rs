//! Dörfler marking, the goal-oriented selection strategies and the
//! adaptive loop.

mod adaptive;
mod select;

pub use adaptive::{adaptive_loop, adaptive_loop_with, AdaptiveHistory, GoalProblem, LevelRecord, LevelResult, StopRule};
pub use select::{
    combined_indicators, doerfler_min_set, select_a, select_b, select_c, Chosen, MarkingConfig, Strategy, GUARD,
};
