use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{softmax, ModelError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the loss changes by less than this between epochs.
    pub tolerance: f64,
    /// Ridge penalty on the non-bias weights.
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, max_epochs: 1000, tolerance: 1e-8, l2: 0.0 }
    }
}

/// Multinomial logistic regression. With two classes the probability of the
/// second class is `sigmoid(z1 - z0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    /// Row-major `n_classes x (d + 1)`; the last entry of each row is the bias.
    pub weights: Vec<f64>,
    pub d: usize,
    pub n_classes: usize,
    pub epochs_run: usize,
    pub final_loss: f64,
}

const CHUNK: usize = 4096;

/// Mean cross-entropy loss of a weight matrix over a data set, with its
/// analytic gradient.
pub struct LogisticObjective<'a> {
    x: &'a [f64],
    y: &'a [usize],
    d: usize,
    n_classes: usize,
    l2: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a [f64], y: &'a [usize], d: usize, n_classes: usize, l2: f64) -> Self {
        assert_eq!(x.len(), y.len() * d, "x must hold y.len() rows of d values");
        Self { x, y, d, n_classes, l2 }
    }

    pub fn n_params(&self) -> usize {
        self.n_classes * (self.d + 1)
    }

    pub fn loss(&self, w: &[f64]) -> f64 {
        self.loss_and_gradient(w).0
    }

    pub fn loss_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let (d, k) = (self.d, self.n_classes);
        let n = self.y.len();
        // fixed chunking, summed in order: the result does not depend on
        // how rayon schedules the chunks
        let partials: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut loss = 0.0;
                let mut grad = vec![0.0; w.len()];
                let mut z = vec![0.0; k];
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let row = &self.x[i * d..(i + 1) * d];
                    for (cls, zc) in z.iter_mut().enumerate() {
                        let wc = &w[cls * (d + 1)..(cls + 1) * (d + 1)];
                        *zc = wc[d] + wc[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
                    }
                    let p = softmax(&z);
                    loss -= p[self.y[i]].max(f64::MIN_POSITIVE).ln();
                    for (cls, pc) in p.iter().enumerate() {
                        let err = pc - f64::from(u8::from(cls == self.y[i]));
                        let g = &mut grad[cls * (d + 1)..(cls + 1) * (d + 1)];
                        for (gj, xj) in g[..d].iter_mut().zip(row) {
                            *gj += err * xj;
                        }
                        g[d] += err;
                    }
                }
                (loss, grad)
            })
            .collect();
        let mut loss = 0.0;
        let mut grad = vec![0.0; w.len()];
        for (l, g) in partials {
            loss += l;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        let nf = n as f64;
        loss /= nf;
        grad.iter_mut().for_each(|g| *g /= nf);
        if self.l2 > 0.0 {
            for cls in 0..k {
                for j in 0..d {
                    let wj = w[cls * (d + 1) + j];
                    loss += 0.5 * self.l2 * wj * wj;
                    grad[cls * (d + 1) + j] += self.l2 * wj;
                }
            }
        }
        (loss, grad)
    }
}

impl LogisticRegression {
    pub(crate) fn fit(c: &LogisticConfig, s: &Samples<'_>) -> Result<Self, ModelError> {
        if c.learning_rate.is_nan() || c.learning_rate <= 0.0 || c.max_epochs == 0 {
            return Err(ModelError::InvalidConfig(
                "learning rate must be positive and max_epochs at least 1".into(),
            ));
        }
        let obj = LogisticObjective::new(s.x, &s.y, s.d, s.n_classes, c.l2);
        let mut w = vec![0.0; obj.n_params()];
        let mut prev = f64::INFINITY;
        let mut epochs_run = 0;
        let mut final_loss = f64::NAN;
        for epoch in 1..=c.max_epochs {
            let (loss, grad) = obj.loss_and_gradient(&w);
            final_loss = loss;
            epochs_run = epoch;
            if (prev - loss).abs() < c.tolerance {
                break;
            }
            prev = loss;
            w.iter_mut().zip(&grad).for_each(|(wi, gi)| *wi -= c.learning_rate * gi);
        }
        Ok(Self { weights: w, d: s.d, n_classes: s.n_classes, epochs_run, final_loss })
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let d = self.d;
        (0..self.n_classes)
            .map(|c| {
                let wc = &self.weights[c * (d + 1)..(c + 1) * (d + 1)];
                wc[d] + wc[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    pub(crate) fn proba(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.scores(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tests::toy;
    use crate::models::{sigmoid, train, ModelKind, ModelParams, ModelSpec};

    #[test]
    fn zero_score_is_even() {
        let lr = LogisticRegression {
            weights: vec![0.0, 0.0, 0.0, 0.0],
            d: 1,
            n_classes: 2,
            epochs_run: 0,
            final_loss: 0.0,
        };
        assert_eq!(lr.proba(&[3.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn binary_reduces_to_sigmoid() {
        let m = toy(vec![vec![0.0], vec![1.0], vec![3.0], vec![4.0]], &["A", "A", "D", "D"]);
        let model = train(&ModelSpec::default_for(ModelKind::Logistic, 1), &m).unwrap();
        let ModelParams::Logistic(lr) = &model.params else { unreachable!() };
        let z = lr.scores(&[2.5]);
        let p = model.predict_proba(&[2.5]).unwrap();
        assert!((p[1] - sigmoid(z[1] - z[0])).abs() < 1e-12);
        assert_eq!(model.predict(&[0.2]).unwrap(), "A");
        assert_eq!(model.predict(&[3.8]).unwrap(), "D");
    }

    #[test]
    fn loss_decreases_over_training() {
        let m = toy(
            vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![3.0, 0.0], vec![4.0, 0.2], vec![2.0, 2.0]],
            &["A", "A", "D", "D", "B"],
        );
        let model = train(&ModelSpec::default_for(ModelKind::Logistic, 1), &m).unwrap();
        let ModelParams::Logistic(lr) = &model.params else { unreachable!() };
        assert!(lr.final_loss < (3f64).ln());
    }
}
