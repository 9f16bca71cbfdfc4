use std::collections::HashSet;

use super::select::{Chosen, MarkingConfig};
use crate::error::{Error, Result};
use crate::estimators::EstimatorField;
use crate::mesh::{AdaptiveMesh, MarkedSet};

/// Everything the loop needs from one level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub eta_u: EstimatorField,
    pub eta_z: EstimatorField,
    /// Discrete goal value, if the problem computes one.
    pub goal: Option<f64>,
    /// Elements refined in addition to the marked ones.
    pub forced: MarkedSet,
}

/// A goal-oriented discretization driven by the adaptive loop.
pub trait GoalProblem: Sync {
    type Mesh: AdaptiveMesh;

    fn initial_mesh(&self) -> Result<Self::Mesh>;

    /// Solves the primal and dual problems and estimates both errors.
    fn solve_level(&self, mesh: &Self::Mesh) -> Result<LevelResult>;

    /// Reference goal value, if one is available.
    fn reference(&self) -> Option<f64> {
        None
    }
}

/// Stopping rule of the adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop once a level has at least this many elements.
    pub max_elements: usize,
    /// Stop once `eta_u * eta_z <= tol`.
    pub tol: Option<f64>,
    /// Hard cap on the number of levels.
    pub max_levels: usize,
    /// Stop before solving on a mesh with an element smaller than this.
    pub min_element_size: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_elements: 200_000,
            tol: None,
            max_levels: 500,
            min_element_size: None,
        }
    }
}

impl StopRule {
    pub fn elements(max_elements: usize) -> Self {
        StopRule {
            max_elements,
            ..Default::default()
        }
    }
}

/// One row of the history.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub ell: usize,
    pub n: usize,
    pub eta_u: f64,
    pub eta_z: f64,
    pub product: f64,
    pub goal: Option<f64>,
    pub goal_err: Option<f64>,
    /// Number of elements marked at this level (after forced additions).
    pub marked: usize,
    pub chosen: Chosen,
    pub ncum: usize,
    /// `(#T_l - #T_0) / sum_{j<l} #M_j`.
    pub closure_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptiveHistory {
    pub records: Vec<LevelRecord>,
    /// True if the tolerance stop fired.
    pub reached_tol: bool,
    /// Error that ended the run early, if any.
    pub aborted: Option<String>,
    /// True if the run stopped at the element size floor.
    pub resolution_limited: bool,
}

impl AdaptiveHistory {
    pub fn last(&self) -> Option<&LevelRecord> {
        self.records.last()
    }

    /// Fills the goal errors from a reference value.
    pub fn set_reference(&mut self, reference: f64) {
        for r in &mut self.records {
            r.goal_err = r.goal.map(|g| (reference - g).abs());
        }
    }

    /// Checks the bookkeeping invariants: strictly increasing `N` and
    /// `ncum` equal to the prefix sum of `N`.
    pub fn check(&self) -> Result<()> {
        let mut sum = 0;
        for (k, r) in self.records.iter().enumerate() {
            sum += r.n;
            if r.ncum != sum || r.ell != k {
                return Err(Error::Numerical(format!("history level {k}: bad cumulative count")));
            }
            if k > 0 && r.n <= self.records[k - 1].n {
                return Err(Error::Numerical(format!("history level {k}: element count did not grow")));
            }
        }
        Ok(())
    }

    /// Smallest `n` with `product(l + n) <= product(l) / 2` for every `l`
    /// that has such a successor.
    pub fn halving_steps(&self) -> Option<usize> {
        let p: Vec<f64> = self.records.iter().map(|r| r.product).collect();
        let mut worst = None;
        for l in 0..p.len() {
            if let Some(n) = (1..p.len() - l).find(|&n| p[l + n] <= 0.5 * p[l]) {
                worst = Some(worst.map_or(n, |w: usize| w.max(n)));
            }
        }
        worst
    }
}

/// Runs solve, estimate, mark and refine until the stop rule fires.
/// `observe` sees every mesh together with its level result.
pub fn adaptive_loop_with<P: GoalProblem>(
    problem: &P,
    config: &MarkingConfig,
    stop: &StopRule,
    mut observe: impl FnMut(usize, &P::Mesh, &LevelResult) -> Result<()>,
) -> AdaptiveHistory {
    let mut history = AdaptiveHistory::default();
    let mut mesh = match problem.initial_mesh() {
        Ok(m) => m,
        Err(e) => {
            history.aborted = Some(e.to_string());
            return history;
        }
    };
    let n0 = mesh.num_elements();
    let reference = problem.reference();
    let mut marked_sum = 0usize;
    let mut ncum = 0usize;
    for ell in 0.. {
        if let Some(floor) = stop.min_element_size {
            if ell > 0 && (0..mesh.num_elements()).any(|t| mesh.element_size(t) < floor) {
                history.resolution_limited = true;
                break;
            }
        }
        let step = (|| -> Result<Option<P::Mesh>> {
            let level = problem.solve_level(&mesh)?;
            observe(ell, &mesh, &level)?;
            let n = mesh.num_elements();
            ncum += n;
            let (eu, ez) = (level.eta_u.norm(), level.eta_z.norm());
            let product = eu * ez;
            history.records.push(LevelRecord {
                ell,
                n,
                eta_u: eu,
                eta_z: ez,
                product,
                goal: level.goal,
                goal_err: match (reference, level.goal) {
                    (Some(r), Some(g)) => Some((r - g).abs()),
                    _ => None,
                },
                marked: 0,
                chosen: Chosen::None,
                ncum,
                closure_ratio: (marked_sum > 0).then(|| (n - n0) as f64 / marked_sum as f64),
            });
            if stop.tol.is_some_and(|tol| product <= tol) {
                history.reached_tol = true;
                return Ok(None);
            }
            if n >= stop.max_elements || ell + 1 >= stop.max_levels {
                return Ok(None);
            }
            let (set, chosen) = config.mark(&level.eta_u, &level.eta_z)?;
            let set = set.union(&level.forced);
            if set.is_empty() {
                return Ok(None);
            }
            let record = history.records.last_mut().unwrap();
            record.marked = set.len();
            record.chosen = chosen;
            marked_sum += set.len();
            let next = mesh.refine_marked(&set)?;
            let ids: HashSet<_> = (0..next.num_elements()).map(|t| next.element_id(t)).collect();
            if let Some(t) = set.iter().find(|&t| ids.contains(&mesh.element_id(t))) {
                return Err(Error::Numerical(format!("marked element {t} survived refinement")));
            }
            if next.num_elements() <= n {
                return Err(Error::Numerical("refinement did not add elements".into()));
            }
            Ok(Some(next))
        })();
        match step {
            Ok(Some(next)) => mesh = next,
            Ok(None) => break,
            Err(e) => {
                history.aborted = Some(e.to_string());
                break;
            }
        }
    }
    history
}

pub fn adaptive_loop<P: GoalProblem>(problem: &P, config: &MarkingConfig, stop: &StopRule) -> AdaptiveHistory {
    adaptive_loop_with(problem, config, stop, |_, _, _| Ok(()))
}
