use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distinct feature indices in selection order, out of `n` features.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSubset {
    indices: Vec<usize>,
    n: usize,
}

impl FeatureSubset {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::arg("feature subset must not be empty"));
        }
        if indices.len() > n {
            return Err(Error::arg(format!("{} indices exceed {n} features", indices.len())));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::arg(format!("feature index {i} out of range for {n} features")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::arg(format!("duplicate feature index {i}")));
            }
        }
        Ok(Self { indices, n })
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn total_features(&self) -> usize {
        self.n
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.indices.contains(&feature)
    }

    /// Indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }

    /// Length-`n` membership vector.
    pub fn binary_vector(&self) -> Vec<bool> {
        let mut v = vec![false; self.n];
        for &i in &self.indices {
            v[i] = true;
        }
        v
    }

    /// Selected feature rate: `len / n`.
    pub fn sfr(&self) -> f64 {
        self.len() as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_vector_marks_members() {
        let s = FeatureSubset::new(vec![3, 0], 5).unwrap();
        assert_eq!(s.binary_vector(), vec![true, false, false, true, false]);
        assert_eq!(s.sorted(), vec![0, 3]);
        assert_eq!(s.sfr(), 0.4);
    }

    #[test]
    fn rejects_invalid() {
        assert!(FeatureSubset::new(vec![], 3).is_err());
        assert!(FeatureSubset::new(vec![3], 3).is_err());
        assert!(FeatureSubset::new(vec![1, 1], 3).is_err());
    }
}
