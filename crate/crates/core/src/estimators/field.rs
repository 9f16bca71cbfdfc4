use crate::error::{input, Result};
use crate::mesh::MarkedSet;

/// Squared refinement indicators `eta(T)^2` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorField {
    indicators: Vec<f64>,
    total: f64,
}

impl EstimatorField {
    pub fn new(indicators: Vec<f64>) -> Result<Self> {
        if let Some(i) = indicators.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return input(format!("indicator {i} is {}", indicators[i]));
        }
        let total = indicators.iter().sum();
        Ok(EstimatorField { indicators, total })
    }

    pub fn indicators(&self) -> &[f64] {
        &self.indicators
    }

    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }

    /// `eta^2`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `eta`.
    pub fn norm(&self) -> f64 {
        self.total.sqrt()
    }

    /// Sum of the squared indicators over `subset`.
    pub fn restrict(&self, subset: &MarkedSet) -> f64 {
        subset.iter().map(|t| self.indicators[t]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_basics() {
        let f = EstimatorField::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.restrict(&MarkedSet::all(4)), f.total());
        assert_eq!(f.restrict(&MarkedSet::empty()), 0.0);
        let (a, b) = (MarkedSet::new([0, 2]), MarkedSet::new([1]));
        assert_eq!(f.restrict(&a.union(&b)), f.restrict(&a) + f.restrict(&b));
        assert!(EstimatorField::new(vec![-1.0]).is_err());
        assert!(EstimatorField::new(vec![f64::NAN]).is_err());
    }
}
