use serde::{Deserialize, Serialize};

use super::{argmax, ModelError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostConfig {
    pub rounds: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        Self { rounds: 10 }
    }
}

/// Depth-1 tree: `x[feature] <= threshold` predicts `left`, otherwise `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

impl Stump {
    pub fn predict(&self, row: &[f64]) -> usize {
        if row[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

/// Multiclass AdaBoost (SAMME) over decision stumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    /// Weighted training error of each round's stump, before clamping.
    pub errors: Vec<f64>,
}

const ERROR_CLAMP: f64 = 1e-10;

impl AdaBoost {
    pub(crate) fn fit(c: &AdaBoostConfig, s: &Samples<'_>) -> Result<Self, ModelError> {
        if c.rounds == 0 {
            return Err(ModelError::InvalidConfig("rounds must be at least 1".into()));
        }
        let n = s.n();
        let k = s.n_classes.max(2) as f64;
        let sorted: Vec<Vec<usize>> = (0..s.d)
            .map(|f| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| s.row(a)[f].total_cmp(&s.row(b)[f]));
                idx
            })
            .collect();
        let mut w = vec![1.0 / n as f64; n];
        let mut model = AdaBoost { stumps: Vec::new(), alphas: Vec::new(), errors: Vec::new() };
        for _ in 0..c.rounds {
            let stump = best_stump(s, &sorted, &w);
            let miss: Vec<bool> = (0..n).map(|i| stump.predict(s.row(i)) != s.y[i]).collect();
            let total: f64 = w.iter().sum();
            let err =
                w.iter().zip(&miss).filter(|(_, &m)| m).map(|(wi, _)| wi).sum::<f64>() / total;
            let clamped = err.clamp(ERROR_CLAMP, (k - 1.0) / k - ERROR_CLAMP);
            let alpha = ((1.0 - clamped) / clamped).ln() + (k - 1.0).ln();
            model.stumps.push(stump);
            model.alphas.push(alpha);
            model.errors.push(err);
            if err <= 0.0 {
                break;
            }
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
        }
        Ok(model)
    }

    /// Class vote weights using only the first `rounds` stumps.
    pub fn votes(&self, row: &[f64], n_classes: usize, rounds: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_classes];
        for (st, a) in self.stumps.iter().zip(&self.alphas).take(rounds) {
            v[st.predict(row)] += a;
        }
        v
    }

    pub fn predict_staged(&self, row: &[f64], n_classes: usize, rounds: usize) -> usize {
        argmax(&self.votes(row, n_classes, rounds))
    }

    pub(crate) fn proba(&self, row: &[f64], n_classes: usize) -> Vec<f64> {
        let mut v = self.votes(row, n_classes, self.stumps.len());
        let total: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        v
    }
}

/// Stump with the lowest weighted error; each side predicts its heaviest class.
fn best_stump(s: &Samples<'_>, sorted: &[Vec<usize>], w: &[f64]) -> Stump {
    let kc = s.n_classes;
    let mut totals = vec![0.0; kc];
    for (i, &wi) in w.iter().enumerate() {
        totals[s.y[i]] += wi;
    }
    let total: f64 = totals.iter().sum();
    let root = argmax(&totals);
    // constant stump as the fallback when no feature can split
    let mut best = (
        total - totals[root],
        Stump { feature: 0, threshold: f64::INFINITY, left: root, right: root },
    );
    for (f, order) in sorted.iter().enumerate() {
        let mut left = vec![0.0; kc];
        for pos in 0..order.len() - 1 {
            let i = order[pos];
            left[s.y[i]] += w[i];
            let (a, b) = (s.row(i)[f], s.row(order[pos + 1])[f]);
            if a == b {
                continue;
            }
            let right: Vec<f64> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
            let (lc, rc) = (argmax(&left), argmax(&right));
            let err = total - left[lc] - right[rc];
            if err < best.0 - 1e-15 {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = (err, Stump { feature: f, threshold, left: lc, right: rc });
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tests::toy;
    use crate::models::{train, ModelParams, ModelSpec};

    fn staged_errors(rows: &[Vec<f64>], labels: &[&str]) -> Vec<usize> {
        let m = toy(rows.to_vec(), labels);
        let spec = ModelSpec::AdaBoost(AdaBoostConfig { rounds: 10 });
        let model = train(&spec, &m).unwrap();
        let ModelParams::AdaBoost(ab) = &model.params else { unreachable!() };
        assert!(ab.alphas.iter().all(|a| a.is_finite() && *a > 0.0));
        (1..=ab.stumps.len())
            .map(|r| {
                m.rows()
                    .zip(m.labels())
                    .filter(|(row, l)| {
                        model.classes[ab.predict_staged(row, model.classes.len(), r)] != **l
                    })
                    .count()
            })
            .collect()
    }

    #[test]
    fn single_split_data_is_solved_in_one_round() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<&str> = (0..20).map(|i| if i < 8 { "A" } else { "D" }).collect();
        let errs = staged_errors(&rows, &labels);
        assert_eq!(errs, vec![0]);
    }

    #[test]
    fn interval_needs_several_stumps() {
        // D occupies a middle band, so no single stump separates it
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<&str> =
            (0..30).map(|i| if (10..20).contains(&i) { "D" } else { "A" }).collect();
        let errs = staged_errors(&rows, &labels);
        assert!(errs[0] > 0);
        assert_eq!(*errs.last().unwrap(), 0);
        assert!(errs.windows(2).all(|p| p[1] <= p[0]), "{errs:?}");
    }

    #[test]
    fn three_classes() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let labels: Vec<&str> = (0..30).map(|i| ["A", "B", "C"][i / 10]).collect();
        let errs = staged_errors(&rows, &labels);
        assert_eq!(*errs.last().unwrap(), 0);
        assert!(errs.windows(2).all(|p| p[1] <= p[0]), "{errs:?}");
    }
}
