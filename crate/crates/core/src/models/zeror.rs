use serde::{Deserialize, Serialize};

use super::Samples;

/// Majority-class baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroR {
    pub priors: Vec<f64>,
}

impl ZeroR {
    pub(crate) fn fit(s: &Samples<'_>) -> Self {
        let n = s.n() as f64;
        Self { priors: s.class_counts().into_iter().map(|c| c as f64 / n).collect() }
    }

    pub(crate) fn proba(&self) -> Vec<f64> {
        self.priors.clone()
    }
}
