use serde::{Deserialize, Serialize};

use super::Samples;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesConfig {
    /// Lower bound on every per-class feature variance.
    pub variance_floor: f64,
}

impl Default for NaiveBayesConfig {
    fn default() -> Self {
        Self { variance_floor: 1e-9 }
    }
}

/// Gaussian naive Bayes: per-class priors and per-feature normal likelihoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub priors: Vec<f64>,
    /// `means[c][j]`
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub(crate) fn fit(c: &NaiveBayesConfig, s: &Samples<'_>) -> Self {
        let k = s.n_classes;
        let counts = s.class_counts();
        let mut means = vec![vec![0.0; s.d]; k];
        for i in 0..s.n() {
            for (m, x) in means[s.y[i]].iter_mut().zip(s.row(i)) {
                *m += x;
            }
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            if n > 0 {
                m.iter_mut().for_each(|v| *v /= n as f64);
            }
        }
        let mut variances = vec![vec![0.0; s.d]; k];
        for i in 0..s.n() {
            let c = s.y[i];
            for ((v, x), m) in variances[c].iter_mut().zip(s.row(i)).zip(&means[c]) {
                *v += (x - m) * (x - m);
            }
        }
        for (v, &n) in variances.iter_mut().zip(&counts) {
            for x in v.iter_mut() {
                *x = if n > 0 { *x / n as f64 } else { 0.0 };
                *x = x.max(c.variance_floor);
            }
        }
        let n = s.n() as f64;
        let priors = counts.iter().map(|&c| c as f64 / n).collect();
        Self { priors, means, variances }
    }

    /// Unnormalised log posterior per class; `-inf` for classes with no
    /// training rows.
    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        self.priors
            .iter()
            .enumerate()
            .map(|(c, &p)| {
                if p == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| {
                        -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
                    })
                    .sum();
                p.ln() + ll
            })
            .collect()
    }

    pub(crate) fn proba(&self, row: &[f64]) -> Vec<f64> {
        super::softmax(&self.log_joint(row))
    }
}
