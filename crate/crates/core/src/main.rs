use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use goafem::harness::{best_ncum, run, sweep, ExperimentConfig, ProblemId};
use goafem::marking::Strategy;

/// Goal-oriented adaptive FEM/BEM experiment runner.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// exp1, exp2, bem_conforming or bem_nonconforming.
    #[arg(long)]
    problem: Option<ProblemId>,
    /// A, B, C, primal_only, dual_only or uniform.
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    theta: Option<f64>,
    /// Polynomial degree (FEM).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_elements: Option<usize>,
    /// Target for the estimator product.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a mesh dump every k levels.
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Element budget of the FEM reference run (0: none).
    #[arg(long)]
    reference_elements: Option<usize>,
    /// Comma separated strategies of a sweep.
    #[arg(long)]
    sweep_strategies: Option<String>,
    /// Comma separated marking parameters of a sweep.
    #[arg(long)]
    sweep_thetas: Option<String>,
}

fn config(cli: &Cli) -> goafem::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::for_problem(cli.problem.unwrap_or(ProblemId::Exp1)),
    };
    if let Some(p) = cli.problem {
        if cli.config.is_some() && p != cfg.problem {
            cfg = ExperimentConfig {
                problem: p,
                ..cfg
            };
        }
    }
    let flags: [(&str, Option<String>); 13] = [
        ("strategy", cli.strategy.map(|s| s.name().to_string())),
        ("theta", cli.theta.map(|v| v.to_string())),
        ("p", cli.p.map(|v| v.to_string())),
        ("nu", cli.nu.map(|v| v.to_string())),
        ("epsilon", cli.epsilon.map(|v| v.to_string())),
        ("max_elements", cli.max_elements.map(|v| v.to_string())),
        ("tol", cli.tol.map(|v| v.to_string())),
        ("out", cli.out.as_ref().map(|v| v.display().to_string())),
        ("snapshot_every", cli.snapshot_every.map(|v| v.to_string())),
        ("reference_elements", cli.reference_elements.map(|v| v.to_string())),
        ("sweep_strategies", cli.sweep_strategies.clone()),
        ("sweep_thetas", cli.sweep_thetas.clone()),
        ("problem", None),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner() -> goafem::Result<()> {
    let cli = Cli::parse();
    let cfg = config(&cli)?;
    if cfg.is_sweep() {
        let entries = sweep(&cfg)?;
        println!("strategy,theta,ncum,reached");
        for e in &entries {
            println!("{},{},{},{}", e.strategy, e.theta, e.ncum, e.reached);
        }
        for &s in &cfg.sweep_strategies {
            if let Some((theta, n)) = best_ncum(&entries, s) {
                println!("# best {s}: theta {theta} ncum {n}");
            }
        }
        return Ok(());
    }
    let out = run(&cfg)?;
    for r in &out.history.records {
        println!(
            "{:3} {:8} eta_u {:.3e} eta_z {:.3e} product {:.3e} goal_err {}",
            r.ell,
            r.n,
            r.eta_u,
            r.eta_z,
            r.product,
            r.goal_err.map_or("-".to_string(), |e| format!("{e:.3e}"))
        );
    }
    println!("quantity,slope,window,residual");
    for f in &out.fits {
        println!("{f}");
    }
    if let Some(reason) = &out.partial {
        println!("# partial result: {reason}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
