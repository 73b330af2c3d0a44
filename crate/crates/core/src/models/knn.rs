use serde::{Deserialize, Serialize};

use super::{squared_distance, ModelError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 1 }
    }
}

/// Lazy nearest-neighbour learner over Euclidean distance. Equal distances
/// are broken by training order, equal vote counts by class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
}

impl Knn {
    pub(crate) fn fit(c: &KnnConfig, s: &Samples<'_>) -> Result<Self, ModelError> {
        if c.k == 0 {
            return Err(ModelError::InvalidConfig("k must be at least 1".into()));
        }
        Ok(Self { k: c.k, d: s.d, x: s.x.to_vec(), y: s.y.clone() })
    }

    /// Training indices of the `k` nearest points, nearest first.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let n = self.y.len();
        let k = self.k.min(n);
        let mut dist: Vec<(f64, usize)> = (0..n)
            .map(|i| (squared_distance(&self.x[i * self.d..(i + 1) * self.d], row), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn proba(&self, row: &[f64], n_classes: usize) -> Vec<f64> {
        let nn = self.neighbors(row);
        let mut votes = vec![0.0; n_classes];
        for &i in &nn {
            votes[self.y[i]] += 1.0;
        }
        let k = nn.len() as f64;
        votes.iter_mut().for_each(|v| *v /= k);
        votes
    }
}
