use std::fmt;

use crate::error::{Error, Result};
use crate::marking::{AdaptiveHistory, LevelRecord};

/// History column a rate can be fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    EtaU,
    EtaZ,
    Product,
    GoalErr,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::EtaU, Quantity::EtaZ, Quantity::Product, Quantity::GoalErr];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::EtaU => "eta_u",
            Quantity::EtaZ => "eta_z",
            Quantity::Product => "product",
            Quantity::GoalErr => "goal_err",
        }
    }

    pub fn of(self, r: &LevelRecord) -> Option<f64> {
        match self {
            Quantity::EtaU => Some(r.eta_u),
            Quantity::EtaZ => Some(r.eta_z),
            Quantity::Product => Some(r.product),
            Quantity::GoalErr => r.goal_err,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Least-squares slope of `log q` against `log N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub quantity: String,
    pub slope: f64,
    /// Range of `N` covered by the fit.
    pub window: (usize, usize),
    /// Number of points used.
    pub points: usize,
    /// Root mean square residual in `log q`.
    pub residual: f64,
}

impl fmt::Display for RateFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{:.6},{}-{},{:.3e}",
            self.quantity, self.slope, self.window.0, self.window.1, self.residual
        )
    }
}

/// Fits `q ~ N^slope` over the trailing window of points with
/// `N >= N_last / decades_span`, extended to at least four points.
/// Non-positive values are skipped.
pub fn fit_points(name: &str, points: &[(usize, f64)], span: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, q)| *n > 0 && *q > 0.0 && q.is_finite())
        .map(|&(n, q)| ((n as f64).ln(), q.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Numerical(format!("{name}: fewer than 4 usable points")));
    }
    let last = pts[pts.len() - 1].0;
    let mut start = pts.iter().rposition(|p| p.0 <= last - span.ln()).unwrap_or(0);
    start = start.min(pts.len() - 4);
    let w = &pts[start..];
    let m = w.len() as f64;
    let (mx, my) = (w.iter().map(|p| p.0).sum::<f64>() / m, w.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = w.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Numerical(format!("{name}: fit window has no spread in N")));
    }
    let sxy: f64 = w.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let res = (w.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / m).sqrt();
    Ok(RateFit {
        quantity: name.to_string(),
        slope,
        window: (w[0].0.exp().round() as usize, last.exp().round() as usize),
        points: w.len(),
        residual: res,
    })
}

/// Rate over the trailing decade in `N`.
pub fn fit_rate(history: &AdaptiveHistory, quantity: Quantity) -> Result<RateFit> {
    let pts: Vec<(usize, f64)> = history
        .records
        .iter()
        .filter_map(|r| quantity.of(r).map(|q| (r.n, q)))
        .collect();
    fit_points(quantity.name(), &pts, 10.0)
}

/// Rate over the trailing decade of the levels whose value exceeds
/// `floor`.
pub fn fit_rate_above(history: &AdaptiveHistory, quantity: Quantity, floor: f64) -> Result<RateFit> {
    let pts: Vec<(usize, f64)> = history
        .records
        .iter()
        .filter_map(|r| quantity.of(r).map(|q| (r.n, q)))
        .filter(|&(_, q)| q > floor)
        .collect();
    fit_points(quantity.name(), &pts, 10.0)
}

/// Cumulative element count up to the first level with
/// `product <= tol`, or `None` if the tolerance was never met.
pub fn ncum_at_tolerance(history: &AdaptiveHistory, tol: f64) -> Option<usize> {
    history.records.iter().find(|r| r.product <= tol).map(|r| r.ncum)
}
