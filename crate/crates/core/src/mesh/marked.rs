use crate::error::{input, Result};

/// A duplicate-free, sorted set of element indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkedSet {
    indices: Vec<usize>,
}

impl MarkedSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        MarkedSet { indices }
    }

    pub fn all(n: usize) -> Self {
        MarkedSet {
            indices: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn union(&self, other: &MarkedSet) -> MarkedSet {
        MarkedSet::new(self.iter().chain(other.iter()))
    }

    /// Fails if any index is `>= n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= n => input(format!(
                "marked element {last} out of range for mesh with {n} elements"
            )),
            _ => Ok(()),
        }
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for i in self.iter() {
            m[i] = true;
        }
        m
    }
}

impl FromIterator<usize> for MarkedSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        MarkedSet::new(iter)
    }
}
