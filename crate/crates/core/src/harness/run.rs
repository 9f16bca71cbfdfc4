use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::bem_problems::BemProblem;
use super::config::{ExperimentConfig, ProblemId};
use super::fem_problems::FemProblem;
use super::rates::{fit_rate, fit_rate_above, ncum_at_tolerance, Quantity, RateFit};
use crate::bem::BemGoalWeight;
use crate::error::{Error, Result};
use crate::goals::{richardson, Reference, ReferenceKind};
use crate::marking::{adaptive_loop, adaptive_loop_with, AdaptiveHistory, GoalProblem, MarkingConfig, StopRule, Strategy};
use crate::mesh::{BoundaryMesh, Mesh2};

/// Goal errors below this multiple of the reference accuracy are not used
/// in rate fits.
pub const REFERENCE_MARGIN: f64 = 10.0;

/// Distance from `Gamma` that counts as boundary layer.
pub const LAYER_WIDTH: f64 = 0.1;

/// A registered problem.
#[derive(Debug)]
pub enum AnyProblem {
    Fem(FemProblem),
    Bem(BemProblem),
}

/// Builds the problem of a configuration, without a reference value for
/// the finite element problems.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<AnyProblem> {
    cfg.validate()?;
    Ok(match cfg.problem {
        ProblemId::Exp1 => AnyProblem::Fem(FemProblem::experiment_one(cfg.degree)?),
        ProblemId::Exp2 => AnyProblem::Fem(FemProblem::experiment_two(cfg.nu, cfg.degree)?),
        ProblemId::BemConforming => AnyProblem::Bem(BemProblem::lshape(BemGoalWeight::lshape_hat(), cfg.epsilon)?),
        ProblemId::BemNonconforming => {
            AnyProblem::Bem(BemProblem::lshape(BemGoalWeight::lshape_characteristic(), cfg.epsilon)?)
        }
    })
}

/// Self-convergence reference: goal value of the finest level of a
/// combined-marking run, with the accuracy estimated from the last three
/// levels.
pub fn fem_reference(problem: &FemProblem, max_elements: usize) -> Result<Reference> {
    let h = adaptive_loop(problem, &MarkingConfig::new(Strategy::C, 0.5)?, &StopRule::elements(max_elements));
    if let Some(e) = h.aborted {
        return Err(Error::Numerical(format!("reference run failed: {e}")));
    }
    let g: Vec<f64> = h.records.iter().filter_map(|r| r.goal).collect();
    if g.len() < 3 {
        return Err(Error::Numerical("reference run too short".into()));
    }
    let last = [g[g.len() - 3], g[g.len() - 2], g[g.len() - 1]];
    let (_, err) = richardson(last);
    let spread = last.iter().map(|v| (v - last[2]).abs()).fold(0.0, f64::max);
    Ok(Reference {
        value: last[2],
        kind: ReferenceKind::SelfConvergence,
        accuracy: err.max(spread),
    })
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub history: AdaptiveHistory,
    pub fits: Vec<RateFit>,
    pub reference: Option<Reference>,
    /// Fraction of elements near `Gamma` on each level (triangle meshes).
    pub layer_fraction: Vec<f64>,
    /// Reason the run is incomplete, if it is.
    pub partial: Option<String>,
}

impl RunOutput {
    pub fn fit(&self, q: Quantity) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.quantity == q.name())
    }
}

/// Fraction of triangles whose centroid lies within `width` of the
/// boundary of the bounding box.
pub fn layer_fraction(mesh: &Mesh2, width: f64) -> f64 {
    let v = mesh.vertices();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in v {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let near = (0..mesh.num_elements())
        .filter(|&t| {
            let c = mesh.coords(t);
            let m = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
            let dist = (0..2).map(|d| (m[d] - lo[d]).min(hi[d] - m[d])).fold(f64::INFINITY, f64::min);
            dist <= width
        })
        .count();
    near as f64 / mesh.num_elements() as f64
}

/// Writes a boundary mesh: header `panels M`, then `x0 y0 x1 y1 generation`.
pub fn write_boundary_dump(mesh: &BoundaryMesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "panels {}", mesh.num_panels())?;
    for i in 0..mesh.num_panels() {
        let (a, b) = mesh.endpoints(i);
        writeln!(w, "{:?} {:?} {:?} {:?} {}", a[0], a[1], b[0], b[1], mesh.generation(i))?;
    }
    Ok(())
}

fn snapshot(dir: Option<&Path>, every: Option<usize>, ell: usize, dump: impl FnOnce(File) -> Result<()>) -> Result<()> {
    if let (Some(dir), Some(k)) = (dir, every) {
        if ell % k == 0 {
            dump(File::create(dir.join(format!("mesh_{ell:03}.txt")))?)?;
        }
    }
    Ok(())
}

fn fits(history: &AdaptiveHistory, reference: Option<&Reference>) -> Vec<RateFit> {
    Quantity::ALL
        .into_iter()
        .filter_map(|q| match (q, reference) {
            (Quantity::GoalErr, Some(r)) => fit_rate_above(history, q, REFERENCE_MARGIN * r.accuracy).ok(),
            _ => fit_rate(history, q).ok(),
        })
        .collect()
}

fn drive<P: GoalProblem>(
    problem: &P,
    cfg: &ExperimentConfig,
    mut observe: impl FnMut(usize, &P::Mesh) -> Result<()>,
) -> Result<AdaptiveHistory> {
    Ok(adaptive_loop_with(problem, &cfg.marking()?, &cfg.stop_rule(), |ell, m, _| observe(ell, m)))
}

/// Runs one configuration and writes its output files if `cfg.out` is set.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let out = cfg.out.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut layer = Vec::new();
    let (history, reference) = match build_problem(cfg)? {
        AnyProblem::Fem(mut p) => {
            let reference = if cfg.reference_elements > 0 {
                let r = fem_reference(&p, cfg.reference_elements)?;
                p.reference = Some(r.value);
                Some(r)
            } else {
                None
            };
            let h = drive(&p, cfg, |ell, m: &Mesh2| {
                layer.push(layer_fraction(m, LAYER_WIDTH));
                snapshot(out, cfg.snapshot_every, ell, |f| m.write_dump(BufWriter::new(f)))
            })?;
            (h, reference)
        }
        AnyProblem::Bem(p) => {
            let reference = Some(p.weight.lshape_reference()?);
            let h = drive(&p, cfg, |ell, m: &BoundaryMesh| {
                snapshot(out, cfg.snapshot_every, ell, |f| write_boundary_dump(m, BufWriter::new(f)))
            })?;
            (h, reference)
        }
    };
    let partial = match (&history.aborted, cfg.tol) {
        (Some(e), _) => Some(format!("aborted: {e}")),
        (None, Some(tol)) if !history.reached_tol => Some(format!("tolerance {tol:e} not reached within the budget")),
        _ => None,
    };
    let output = RunOutput {
        fits: fits(&history, reference.as_ref()),
        history,
        reference,
        layer_fraction: layer,
        partial,
    };
    if let Some(dir) = out {
        write_outputs(dir, &output)?;
    }
    Ok(output)
}

/// `history.csv`, its `.dat` mirror, `rates.txt` and `status.txt`.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<()> {
    write_history_csv(&output.history, BufWriter::new(File::create(dir.join("history.csv"))?))?;
    write_history_dat(&output.history, BufWriter::new(File::create(dir.join("history.dat"))?))?;
    write_rates(&output.fits, BufWriter::new(File::create(dir.join("rates.txt"))?))?;
    let mut s = BufWriter::new(File::create(dir.join("status.txt"))?);
    match &output.partial {
        Some(reason) => writeln!(s, "partial: {reason}")?,
        None => writeln!(s, "complete")?,
    }
    if let Some(r) = &output.reference {
        writeln!(s, "reference {:?} {:?} accuracy {:e}", r.value, r.kind, r.accuracy)?;
    }
    if let Some(f) = output.layer_fraction.last() {
        writeln!(s, "layer_fraction {f}")?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

pub const HISTORY_HEADER: &str = "ell,N,eta_u,eta_z,product,goal_err,marked,chosen,ncum";

/// Writes the history as CSV after checking the cumulative counts.
pub fn write_history_csv(h: &AdaptiveHistory, mut w: impl Write) -> Result<()> {
    h.check()?;
    writeln!(w, "{HISTORY_HEADER}")?;
    for r in &h.records {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{},{},{},{}",
            r.ell,
            r.n,
            r.eta_u,
            r.eta_z,
            r.product,
            opt(r.goal_err),
            r.marked,
            r.chosen,
            r.ncum
        )?;
    }
    Ok(())
}

/// Whitespace separated mirror of the CSV; missing values are `nan`.
pub fn write_history_dat(h: &AdaptiveHistory, mut w: impl Write) -> Result<()> {
    h.check()?;
    writeln!(w, "# {}", HISTORY_HEADER.replace(',', " "))?;
    for r in &h.records {
        writeln!(
            w,
            "{} {} {:e} {:e} {:e} {:e} {} {} {}",
            r.ell,
            r.n,
            r.eta_u,
            r.eta_z,
            r.product,
            r.goal_err.unwrap_or(f64::NAN),
            r.marked,
            r.chosen,
            r.ncum
        )?;
    }
    Ok(())
}

pub fn write_rates(fits: &[RateFit], mut w: impl Write) -> Result<()> {
    writeln!(w, "quantity,slope,window,residual")?;
    for f in fits {
        writeln!(w, "{f}")?;
    }
    Ok(())
}

/// One cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub strategy: Strategy,
    pub theta: f64,
    /// Cumulative element count at the tolerance, or the count of the
    /// whole run if the tolerance was missed.
    pub ncum: usize,
    pub reached: bool,
    pub history: AdaptiveHistory,
}

/// Runs every (strategy, theta) pair of the sweep as an independent job.
/// Writes `ncum.csv` and one history per job if `cfg.out` is set.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepEntry>> {
    let tol = cfg.tol.ok_or_else(|| Error::Config("a sweep needs a tolerance".into()))?;
    if !cfg.is_sweep() {
        return Err(Error::Config("no sweep strategies or thetas".into()));
    }
    let jobs: Vec<(Strategy, f64)> = cfg
        .sweep_strategies
        .iter()
        .flat_map(|&s| cfg.sweep_thetas.iter().map(move |&t| (s, t)))
        .collect();
    let entries: Vec<Result<SweepEntry>> = jobs
        .par_iter()
        .map(|&(strategy, theta)| {
            let job = ExperimentConfig {
                strategy,
                theta,
                reference_elements: 0,
                sweep_strategies: Vec::new(),
                sweep_thetas: Vec::new(),
                out: cfg.out.as_ref().map(|d| d.join(format!("{}_{theta}", strategy.name()))),
                ..cfg.clone()
            };
            let out = run(&job)?;
            let h = out.history;
            let (ncum, reached) = match ncum_at_tolerance(&h, tol) {
                Some(n) => (n, true),
                None => (h.last().map_or(0, |r| r.ncum), false),
            };
            Ok(SweepEntry {
                strategy,
                theta,
                ncum,
                reached,
                history: h,
            })
        })
        .collect();
    let entries = entries.into_iter().collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        write_ncum(&entries, BufWriter::new(File::create(dir.join("ncum.csv"))?))?;
    }
    Ok(entries)
}

pub fn write_ncum(entries: &[SweepEntry], mut w: impl Write) -> Result<()> {
    writeln!(w, "strategy,theta,ncum,reached")?;
    for e in entries {
        e.history.check()?;
        writeln!(w, "{},{},{},{}", e.strategy, e.theta, e.ncum, e.reached)?;
    }
    Ok(())
}

/// Smallest cumulative count over the thetas of one strategy, among the
/// entries that reached the tolerance.
pub fn best_ncum(entries: &[SweepEntry], strategy: Strategy) -> Option<(f64, usize)> {
    entries
        .iter()
        .filter(|e| e.strategy == strategy && e.reached)
        .map(|e| (e.theta, e.ncum))
        .min_by_key(|e| e.1)
}
