use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{softmax, ModelError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Regularisation strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { lambda: 1e-4, epochs: 20, seed: 1 }
    }
}

/// `max(0, 1 - margin)` where `margin = y * f(x)`.
pub fn hinge_loss(margin: f64) -> f64 {
    if margin >= 1.0 {
        0.0
    } else {
        1.0 - margin
    }
}

/// One-vs-rest linear SVM trained with Pegasos stochastic subgradient steps.
/// Class probabilities are the softmax of the per-class decision values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// Row-major `n_classes x (d + 1)`; the last entry of each row is the bias.
    pub weights: Vec<f64>,
    pub d: usize,
    pub n_classes: usize,
}

/// Regularised hinge objective of one binary problem over augmented inputs
/// `[x, 1]`: `lambda/2 * |w|^2 + mean(hinge(y * w.x))`.
pub struct SvmObjective<'a> {
    x: &'a [f64],
    /// +1 / -1 targets.
    y: &'a [f64],
    d: usize,
    lambda: f64,
}

impl<'a> SvmObjective<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64], d: usize, lambda: f64) -> Self {
        assert_eq!(x.len(), y.len() * d, "x must hold y.len() rows of d values");
        Self { x, y, d, lambda }
    }

    fn margin(&self, w: &[f64], i: usize) -> f64 {
        let row = &self.x[i * self.d..(i + 1) * self.d];
        self.y[i] * (w[self.d] + w[..self.d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        let n = self.y.len() as f64;
        let reg = 0.5 * self.lambda * w.iter().map(|v| v * v).sum::<f64>();
        reg + (0..self.y.len()).map(|i| hinge_loss(self.margin(w, i))).sum::<f64>() / n
    }

    pub fn subgradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.y.len() as f64;
        let mut g: Vec<f64> = w.iter().map(|v| self.lambda * v).collect();
        for i in 0..self.y.len() {
            if self.margin(w, i) < 1.0 {
                let row = &self.x[i * self.d..(i + 1) * self.d];
                for (gj, xj) in g[..self.d].iter_mut().zip(row) {
                    *gj -= self.y[i] * xj / n;
                }
                g[self.d] -= self.y[i] / n;
            }
        }
        g
    }

    /// Smallest `|margin - 1|` over the data, i.e. the distance to the kink.
    pub fn kink_distance(&self, w: &[f64]) -> f64 {
        (0..self.y.len()).map(|i| (self.margin(w, i) - 1.0).abs()).fold(f64::INFINITY, f64::min)
    }
}

impl LinearSvm {
    pub(crate) fn fit(c: &SvmConfig, s: &Samples<'_>) -> Result<Self, ModelError> {
        if c.lambda.is_nan() || c.lambda <= 0.0 || c.epochs == 0 {
            return Err(ModelError::InvalidConfig(
                "lambda must be positive and epochs at least 1".into(),
            ));
        }
        let mut weights = Vec::with_capacity(s.n_classes * (s.d + 1));
        for cls in 0..s.n_classes {
            let targets: Vec<f64> =
                s.y.iter().map(|&y| if y == cls { 1.0 } else { -1.0 }).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(cls as u64));
            weights.extend(pegasos(s, &targets, c.lambda, c.epochs, &mut rng));
        }
        Ok(Self { weights, d: s.d, n_classes: s.n_classes })
    }

    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        let d = self.d;
        (0..self.n_classes)
            .map(|c| {
                let wc = &self.weights[c * (d + 1)..(c + 1) * (d + 1)];
                wc[d] + wc[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    pub(crate) fn proba(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.decision_values(row))
    }
}

/// Pegasos over augmented inputs `[x, 1]`. The weight vector is stored as
/// `scale * v` so the shrink step is O(1).
fn pegasos(
    s: &Samples<'_>,
    targets: &[f64],
    lambda: f64,
    epochs: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let d = s.d;
    let mut v = vec![0.0; d + 1];
    let mut scale = 1.0;
    let mut norm_sq = 0.0; // |v|^2
    let radius_sq = 1.0 / lambda;
    let mut order: Vec<usize> = (0..s.n()).collect();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = s.row(i);
            let dot = v[d] + v[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            let margin = targets[i] * scale * dot;

            scale *= 1.0 - eta * lambda;
            if scale == 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
                norm_sq = 0.0;
                scale = 1.0;
            }
            if margin < 1.0 {
                let a = eta * targets[i] / scale;
                let x_sq = row.iter().map(|x| x * x).sum::<f64>() + 1.0;
                let vx = if norm_sq == 0.0 { 0.0 } else { dot };
                norm_sq += 2.0 * a * vx + a * a * x_sq;
                for (vj, xj) in v[..d].iter_mut().zip(row) {
                    *vj += a * xj;
                }
                v[d] += a;
            }
            let w_norm_sq = scale * scale * norm_sq.max(0.0);
            if w_norm_sq > radius_sq {
                scale *= (radius_sq / w_norm_sq).sqrt();
            }
        }
    }
    v.into_iter().map(|x| x * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tests::toy;
    use crate::models::{train, ModelKind, ModelSpec};

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_loss(1.5), 0.0);
        assert!((hinge_loss(0.2) - 0.8).abs() < 1e-15);
        assert_eq!(hinge_loss(1.0), 0.0);
        assert_eq!(hinge_loss(-1.0), 2.0);
    }

    #[test]
    fn separates_linear_classes() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let t = i as f64 / 30.0;
            rows.push(vec![t, 0.1 + t * 0.2]);
            labels.push("A");
            rows.push(vec![t, 0.9 - t * 0.2]);
            labels.push("D");
        }
        let m = toy(rows, &labels);
        let model = train(&ModelSpec::default_for(ModelKind::Svm, 1), &m).unwrap();
        let hits =
            m.rows().zip(m.labels()).filter(|(r, l)| model.predict(r).unwrap() == *l).count();
        assert!(hits >= 57, "{hits}/60");
        let p = model.predict_proba(&[0.5, 0.5]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_tracking_matches_direct_norm() {
        // projection relies on the incrementally maintained |v|^2
        let m = toy(
            vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, -2.0], vec![0.0, 1.0]],
            &["A", "D", "A", "D"],
        );
        let s = Samples { x: m.values(), d: 2, y: vec![0, 1, 0, 1], n_classes: 2 };
        let targets = [1.0, -1.0, 1.0, -1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = pegasos(&s, &targets, 0.1, 50, &mut rng);
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm <= (1.0f64 / 0.1).sqrt() + 1e-9);
    }
}
