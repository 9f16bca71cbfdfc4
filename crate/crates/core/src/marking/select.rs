use std::fmt;
use std::str::FromStr;

use crate::error::{input, Error, Result};
use crate::estimators::EstimatorField;
use crate::mesh::MarkedSet;

/// Relative guard for the floating point Dörfler and identity checks.
pub const GUARD: f64 = 1e-12;

/// Element indices sorted by decreasing value, ties by increasing index.
fn descending(values: &[f64], subset: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = subset.collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Smallest set `M` with `theta * sum(all) <= sum(M)`.
pub fn doerfler_min_set(indicators2: &[f64], theta: f64) -> Result<MarkedSet> {
    if !(theta > 0.0 && theta <= 1.0) {
        return input(format!("marking parameter {theta} not in (0, 1]"));
    }
    if let Some(i) = indicators2.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
        return input(format!("indicator {i} is {}", indicators2[i]));
    }
    let direct: f64 = indicators2.iter().sum();
    if direct == 0.0 {
        return Ok(MarkedSet::empty());
    }
    if theta == 1.0 {
        return Ok(MarkedSet::new((0..indicators2.len()).filter(|&i| indicators2[i] > 0.0)));
    }
    let order = descending(indicators2, 0..indicators2.len());
    let target = theta * direct;
    let mut acc = 0.0;
    let mut chosen = Vec::new();
    for &i in &order {
        if acc * (1.0 + GUARD) >= target {
            break;
        }
        acc += indicators2[i];
        chosen.push(i);
    }
    let set = MarkedSet::new(chosen);
    let marked: f64 = set.iter().map(|i| indicators2[i]).sum();
    if theta * direct > marked * (1.0 + GUARD) {
        return Err(Error::Numerical(format!(
            "Dörfler property violated: {theta} * {direct:e} > {marked:e}"
        )));
    }
    Ok(set)
}

/// Which estimator's set was used for refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chosen {
    Primal,
    Dual,
    /// Smaller set enlarged by the largest entries of the other.
    Enlarged,
    /// Combined indicators.
    Combined,
    All,
    None,
}

impl fmt::Display for Chosen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chosen::Primal => "u",
            Chosen::Dual => "z",
            Chosen::Enlarged => "uz",
            Chosen::Combined => "rho",
            Chosen::All => "all",
            Chosen::None => "-",
        })
    }
}

/// The smaller of the two sets, the primal one on ties.
pub fn select_a(mark_u: &MarkedSet, mark_z: &MarkedSet) -> (MarkedSet, Chosen) {
    if mark_u.len() <= mark_z.len() {
        (mark_u.clone(), Chosen::Primal)
    } else {
        (mark_z.clone(), Chosen::Dual)
    }
}

/// The smaller set `W` together with the `#W` largest elements of the other
/// set (ranked by that set's indicators).
pub fn select_b(mark_u: &MarkedSet, mark_z: &MarkedSet, indicators2_u: &[f64], indicators2_z: &[f64]) -> MarkedSet {
    let (small, other, other_ind) = if mark_u.len() <= mark_z.len() {
        (mark_u, mark_z, indicators2_z)
    } else {
        (mark_z, mark_u, indicators2_u)
    };
    let extra = descending(other_ind, other.iter());
    small.union(&MarkedSet::new(extra.into_iter().take(small.len())))
}

/// Combined indicators `rho(T)^2 = eta_u(T)^2 eta_z^2 + eta_u^2 eta_z(T)^2`.
pub fn combined_indicators(eta_u: &EstimatorField, eta_z: &EstimatorField) -> Result<Vec<f64>> {
    if eta_u.len() != eta_z.len() {
        return input("primal and dual estimators live on different meshes");
    }
    let (tu, tz) = (eta_u.total(), eta_z.total());
    let rho: Vec<f64> = eta_u
        .indicators()
        .iter()
        .zip(eta_z.indicators())
        .map(|(u, z)| u * tz + tu * z)
        .collect();
    let total: f64 = rho.iter().sum();
    let expect = 2.0 * tu * tz;
    if (total - expect).abs() > GUARD * expect {
        return Err(Error::Numerical(format!(
            "combined indicators sum to {total:e}, expected {expect:e}"
        )));
    }
    Ok(rho)
}

/// Dörfler marking for the combined indicators.
pub fn select_c(eta_u: &EstimatorField, eta_z: &EstimatorField, theta: f64) -> Result<MarkedSet> {
    doerfler_min_set(&combined_indicators(eta_u, eta_z)?, theta)
}

/// Marking strategies: the three goal-oriented ones and three baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    A,
    B,
    C,
    PrimalOnly,
    DualOnly,
    Uniform,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::A,
        Strategy::B,
        Strategy::C,
        Strategy::PrimalOnly,
        Strategy::DualOnly,
        Strategy::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::A => "A",
            Strategy::B => "B",
            Strategy::C => "C",
            Strategy::PrimalOnly => "primal_only",
            Strategy::DualOnly => "dual_only",
            Strategy::Uniform => "uniform",
        }
    }

    pub fn is_goal_oriented(self) -> bool {
        matches!(self, Strategy::A | Strategy::B | Strategy::C)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown strategy '{s}'")))
    }
}

/// Marking parameter and strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkingConfig {
    pub theta: f64,
    pub strategy: Strategy,
}

impl MarkingConfig {
    pub fn new(strategy: Strategy, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Config(format!("marking parameter {theta} not in (0, 1]")));
        }
        Ok(MarkingConfig { theta, strategy })
    }

    /// Elements to refine for the given estimators.
    pub fn mark(&self, eta_u: &EstimatorField, eta_z: &EstimatorField) -> Result<(MarkedSet, Chosen)> {
        let theta = self.theta;
        Ok(match self.strategy {
            Strategy::Uniform => (MarkedSet::all(eta_u.len()), Chosen::All),
            Strategy::PrimalOnly => (doerfler_min_set(eta_u.indicators(), theta)?, Chosen::Primal),
            Strategy::DualOnly => (doerfler_min_set(eta_z.indicators(), theta)?, Chosen::Dual),
            Strategy::A => {
                let mu = doerfler_min_set(eta_u.indicators(), theta)?;
                let mz = doerfler_min_set(eta_z.indicators(), theta)?;
                select_a(&mu, &mz)
            }
            Strategy::B => {
                let mu = doerfler_min_set(eta_u.indicators(), theta)?;
                let mz = doerfler_min_set(eta_z.indicators(), theta)?;
                (select_b(&mu, &mz, eta_u.indicators(), eta_z.indicators()), Chosen::Enlarged)
            }
            Strategy::C => (select_c(eta_u, eta_z, theta)?, Chosen::Combined),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_min(ind: &[f64], theta: f64) -> usize {
        let n = ind.len();
        let total: f64 = ind.iter().sum();
        let mut best = n;
        for mask in 0u32..(1 << n) {
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ind[i]).sum();
            if theta * total <= s * (1.0 + GUARD) {
                best = best.min(mask.count_ones() as usize);
            }
        }
        best
    }

    #[test]
    fn doerfler_examples() {
        assert_eq!(doerfler_min_set(&[9.0, 4.0, 4.0, 1.0], 0.5).unwrap(), MarkedSet::new([0]));
        assert_eq!(doerfler_min_set(&[0.0, 3.0, 0.0, 1e-20], 1.0).unwrap(), MarkedSet::new([1, 3]));
        assert_eq!(doerfler_min_set(&[2.5], 0.1).unwrap(), MarkedSet::new([0]));
        assert!(doerfler_min_set(&[0.0, 0.0], 0.5).unwrap().is_empty());
        assert!(doerfler_min_set(&[1.0], 0.0).is_err());
        assert!(doerfler_min_set(&[1.0], 1.5).is_err());
        // ties by index
        assert_eq!(doerfler_min_set(&[1.0, 2.0, 2.0, 2.0], 0.5).unwrap(), MarkedSet::new([1, 2]));
    }

    #[test]
    fn doerfler_minimal_small_cases() {
        let vals = [0.0, 1.0, 2.0, 3.5, 7.0];
        for n in 1..=5usize {
            for code in 0..vals.len().pow(n as u32) {
                let ind: Vec<f64> = (0..n).map(|k| vals[code / vals.len().pow(k as u32) % vals.len()]).collect();
                for theta in [0.3, 0.5, 0.7, 1.0] {
                    let m = doerfler_min_set(&ind, theta).unwrap();
                    if ind.iter().sum::<f64>() > 0.0 {
                        assert_eq!(m.len(), brute_force_min(&ind, theta), "{ind:?} {theta}");
                    }
                }
            }
        }
    }

    #[test]
    fn select_a_rules() {
        let (u3, z5) = (MarkedSet::new([0, 1, 2]), MarkedSet::new([3, 4, 5, 6, 7]));
        assert_eq!(select_a(&u3, &z5), (u3.clone(), Chosen::Primal));
        assert_eq!(select_a(&z5, &u3).1, Chosen::Dual);
        let z3 = MarkedSet::new([5, 6, 7]);
        for _ in 0..3 {
            assert_eq!(select_a(&u3, &z3).0, u3);
        }
        assert!(select_a(&u3, &MarkedSet::empty()).0.is_empty());
    }

    #[test]
    fn select_b_rules() {
        let iu = [5.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let iz = [0.0, 0.0, 1.0, 3.0, 2.0, 3.0, 0.5];
        let mu = MarkedSet::new([0, 1]);
        let mz = MarkedSet::new([2, 3, 4, 5, 6]);
        let m = select_b(&mu, &mz, &iu, &iz);
        assert_eq!(m, MarkedSet::new([0, 1, 3, 5]));
        // overlap collapses
        let m = select_b(&MarkedSet::new([3, 5]), &mz, &iu, &iz);
        assert_eq!(m, MarkedSet::new([3, 5]));
        assert!(select_b(&MarkedSet::empty(), &mz, &iu, &iz).is_empty());
    }

    #[test]
    fn select_c_rules() {
        let u = EstimatorField::new(vec![1.0, 2.0, 3.0]).unwrap();
        let zero = EstimatorField::new(vec![0.0; 3]).unwrap();
        assert!(select_c(&u, &zero, 0.5).unwrap().is_empty());
        let n = 10;
        let a = EstimatorField::new(vec![0.3; n]).unwrap();
        let b = EstimatorField::new(vec![1.7; n]).unwrap();
        for theta in [0.1, 0.35, 0.5, 0.9] {
            let m = select_c(&a, &b, theta).unwrap();
            assert_eq!(m.len(), (theta * n as f64 - 1e-9).ceil() as usize);
        }
    }

    #[test]
    fn combined_never_marks_fewer_than_a() {
        // the rho share of a set is the mean of its u and z shares, so a
        // rho-Dörfler set satisfies one of the single Dörfler properties
        let vals = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0];
        for n in 1..=4usize {
            let combos = vals.len().pow(n as u32);
            for cu in 0..combos {
                for cz in 0..combos {
                    let pick = |c: usize| -> Vec<f64> {
                        (0..n).map(|k| vals[c / vals.len().pow(k as u32) % vals.len()]).collect()
                    };
                    let (iu, iz) = (pick(cu), pick(cz));
                    if iu.iter().sum::<f64>() == 0.0 || iz.iter().sum::<f64>() == 0.0 {
                        continue;
                    }
                    let u = EstimatorField::new(iu.clone()).unwrap();
                    let z = EstimatorField::new(iz.clone()).unwrap();
                    for theta in [0.3, 0.5, 0.7] {
                        let mu = doerfler_min_set(&iu, theta).unwrap();
                        let mz = doerfler_min_set(&iz, theta).unwrap();
                        let mc = select_c(&u, &z, theta).unwrap();
                        assert!(mc.len() >= select_a(&mu, &mz).0.len(), "{iu:?} {iz:?} {theta}");
                    }
                }
            }
        }
    }

    #[test]
    fn strategy_parsing() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("D".parse::<Strategy>().is_err());
    }
}
