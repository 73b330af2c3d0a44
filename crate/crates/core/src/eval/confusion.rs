//! Multiclass confusion matrices and the metrics derived from them.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// `counts[i][j]`: instances of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self { classes, counts: vec![vec![0; n]; n] }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        let n = classes.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(EvalError::ShapeMismatch(n));
        }
        Ok(Self { classes, counts })
    }

    /// Builds a matrix from parallel true/predicted class indices.
    pub fn from_predictions(
        classes: Vec<String>,
        actual: &[usize],
        predicted: &[usize],
    ) -> Result<Self, EvalError> {
        if actual.len() != predicted.len() {
            return Err(EvalError::LengthMismatch(actual.len(), predicted.len()));
        }
        let mut cm = Self::new(classes);
        for (&a, &p) in actual.iter().zip(predicted) {
            cm.record(a, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, actual: usize, predicted: usize) -> Result<(), EvalError> {
        let n = self.classes.len();
        if actual >= n || predicted >= n {
            return Err(EvalError::IndexOutOfRange { index: actual.max(predicted), classes: n });
        }
        self.counts[actual][predicted] += 1;
        Ok(())
    }

    /// Element-wise sum; both matrices must share the same classes.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<(), EvalError> {
        if self.classes != other.classes {
            return Err(EvalError::ClassMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn per_class_counts(&self, i: usize) -> Result<ClassCounts, EvalError> {
        let n = self.classes.len();
        if i >= n {
            return Err(EvalError::IndexOutOfRange { index: i, classes: n });
        }
        let tp = self.counts[i][i];
        let fp = (0..n).filter(|&j| j != i).map(|j| self.counts[j][i]).sum();
        let fn_ = (0..n).filter(|&j| j != i).map(|j| self.counts[i][j]).sum();
        let tn = (0..n)
            .filter(|&j| j != i)
            .flat_map(|j| (0..n).filter(move |&k| k != i).map(move |k| (j, k)))
            .map(|(j, k)| self.counts[j][k])
            .sum();
        Ok(ClassCounts { tp, fp, fn_, tn })
    }

    /// Accuracy in percent.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.trace() as f64 / total as f64
        }
    }
}

/// A percentage that may be undefined because its denominator was zero; an
/// undefined value is reported as `0` with `undefined` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percent {
    pub value: f64,
    pub undefined: bool,
}

impl Percent {
    fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Percent { value: 0.0, undefined: true }
        } else {
            Percent { value: 100.0 * num / den, undefined: false }
        }
    }

    fn f1(p: Percent, r: Percent) -> Self {
        if p.undefined || r.undefined || p.value + r.value == 0.0 {
            Percent { value: 0.0, undefined: true }
        } else {
            Percent { value: 2.0 * p.value * r.value / (p.value + r.value), undefined: false }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub counts: ClassCounts,
    pub precision: Percent,
    pub recall: Percent,
    pub f1: Percent,
}

/// Mean of the per-class one-vs-rest 2x2 matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedBinary {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
    pub precision: Percent,
    pub recall: Percent,
    pub f1: Percent,
    pub accuracy: Percent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub total: u64,
    /// `100 * trace / total`.
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub averaged: AveragedBinary,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let n = cm.classes.len();
    let mut per_class = Vec::with_capacity(n);
    let mut sums = [0.0f64; 4];
    for i in 0..n {
        let c = cm.per_class_counts(i)?;
        let precision = Percent::ratio(c.tp as f64, (c.tp + c.fp) as f64);
        let recall = Percent::ratio(c.tp as f64, (c.tp + c.fn_) as f64);
        per_class.push(ClassMetrics {
            class: cm.classes[i].clone(),
            counts: c,
            precision,
            recall,
            f1: Percent::f1(precision, recall),
        });
        for (s, v) in sums.iter_mut().zip([c.tp, c.fp, c.fn_, c.tn]) {
            *s += v as f64;
        }
    }
    let [tp, fp, fn_, tn] = sums.map(|s| s / n as f64);
    let precision = Percent::ratio(tp, tp + fp);
    let recall = Percent::ratio(tp, tp + fn_);
    let averaged = AveragedBinary {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1: Percent::f1(precision, recall),
        accuracy: Percent::ratio(tp + tn, tp + fn_ + fp + tn),
    };
    Ok(MetricsReport { confusion: cm.clone(), total, accuracy: cm.accuracy(), per_class, averaged })
}
