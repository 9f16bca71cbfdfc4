use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::marking::{MarkingConfig, StopRule, Strategy};

/// Registered experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    /// Poisson problem with a volume goal on the unit square.
    Exp1,
    /// Rotating convection-diffusion with a weighted boundary flux goal.
    Exp2,
    /// L-shaped BEM benchmark with a hat weight.
    BemConforming,
    /// L-shaped BEM benchmark with a characteristic weight.
    BemNonconforming,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::Exp1,
        ProblemId::Exp2,
        ProblemId::BemConforming,
        ProblemId::BemNonconforming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Exp1 => "exp1",
            ProblemId::Exp2 => "exp2",
            ProblemId::BemConforming => "bem_conforming",
            ProblemId::BemNonconforming => "bem_nonconforming",
        }
    }

    pub fn is_bem(self) -> bool {
        matches!(self, ProblemId::BemConforming | ProblemId::BemNonconforming)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }
}

/// Everything that determines one run. All runs are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub strategy: Strategy,
    pub theta: f64,
    /// Polynomial degree; ignored by the BEM problems.
    pub degree: usize,
    /// Diffusion of the convection-diffusion problem.
    pub nu: f64,
    /// Estimator rescaling of the non-conforming BEM problem.
    pub epsilon: f64,
    pub max_elements: usize,
    /// Target for `eta_u * eta_z`.
    pub tol: Option<f64>,
    pub max_levels: usize,
    pub out: Option<PathBuf>,
    /// Write a mesh dump every `k` levels.
    pub snapshot_every: Option<usize>,
    /// Element budget of the self-convergence reference run of the FEM
    /// problems; no reference if zero.
    pub reference_elements: usize,
    /// Strategies and marking parameters of a sweep; empty for single runs.
    pub sweep_strategies: Vec<Strategy>,
    pub sweep_thetas: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemId::Exp1,
            strategy: Strategy::C,
            theta: 0.5,
            degree: 3,
            nu: 1e-3,
            epsilon: 0.3,
            max_elements: 30_000,
            tol: None,
            max_levels: 500,
            out: None,
            snapshot_every: None,
            reference_elements: 0,
            sweep_strategies: Vec::new(),
            sweep_thetas: Vec::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Defaults of the given problem.
    pub fn for_problem(problem: ProblemId) -> Self {
        let base = ExperimentConfig {
            problem,
            ..Default::default()
        };
        match problem {
            ProblemId::Exp1 => base,
            ProblemId::Exp2 => ExperimentConfig {
                strategy: Strategy::B,
                theta: 0.6,
                degree: 1,
                max_elements: 20_000,
                ..base
            },
            ProblemId::BemConforming => ExperimentConfig {
                max_elements: 4000,
                ..base
            },
            ProblemId::BemNonconforming => ExperimentConfig {
                strategy: Strategy::A,
                max_elements: 5000,
                ..base
            },
        }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "problem" => self.problem = parse(key, value)?,
            "strategy" => self.strategy = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "p" | "degree" => self.degree = parse(key, value)?,
            "nu" => self.nu = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "max_elements" => self.max_elements = parse(key, value)?,
            "max_levels" => self.max_levels = parse(key, value)?,
            "tol" => self.tol = if value.is_empty() { None } else { Some(parse(key, value)?) },
            "out" => self.out = Some(PathBuf::from(value)),
            "snapshot_every" => self.snapshot_every = Some(parse(key, value)?),
            "reference_elements" => self.reference_elements = parse(key, value)?,
            "sweep_strategies" => self.sweep_strategies = parse_list(key, value)?,
            "sweep_thetas" => self.sweep_thetas = parse_list(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment. A `problem`
    /// line, if present, selects the defaults the other keys override.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        let mut cfg = match pairs.iter().find(|(k, _)| k == "problem") {
            Some((k, v)) => ExperimentConfig::for_problem(parse(k, v)?),
            None => ExperimentConfig::default(),
        };
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        MarkingConfig::new(self.strategy, self.theta)?;
        for &t in &self.sweep_thetas {
            MarkingConfig::new(self.strategy, t)?;
        }
        if !(1..=3).contains(&self.degree) {
            return Err(Error::Config(format!("degree {} not in 1..=3", self.degree)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("diffusion {} must be positive", self.nu)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("rescaling parameter {} not in [0, 1)", self.epsilon)));
        }
        if self.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::Config("snapshot interval must be positive".into()));
        }
        if !self.sweep_strategies.is_empty() != !self.sweep_thetas.is_empty() {
            return Err(Error::Config("a sweep needs both strategies and thetas".into()));
        }
        Ok(())
    }

    pub fn marking(&self) -> Result<MarkingConfig> {
        MarkingConfig::new(self.strategy, self.theta)
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            max_elements: self.max_elements,
            tol: self.tol,
            max_levels: self.max_levels,
            min_element_size: None,
        }
    }

    pub fn is_sweep(&self) -> bool {
        !self.sweep_strategies.is_empty()
    }
}
