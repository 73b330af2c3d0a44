//! k-fold cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::{metrics, ConfusionMatrix, MetricsReport, Percent};
use super::EvalError;
use crate::matrix::FeatureMatrix;
use crate::models::{self, ModelSpec};
use crate::preprocess::{FitPolicy, NormalizationParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Rows are shuffled into folds.
    #[default]
    RandomWindow,
    /// Each fold is a contiguous stretch of rows (per class when stratified),
    /// so overlapping windows rarely straddle train and test.
    BlockedTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: usize,
    pub stratified: bool,
    pub seed: u64,
    pub split_mode: SplitMode,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self { folds: 10, stratified: true, seed: 1, split_mode: SplitMode::RandomWindow }
    }
}

/// Fold number of every row.
pub fn assign_folds(labels: &[String], plan: &CvPlan) -> Result<Vec<usize>, EvalError> {
    let k = plan.folds;
    if k < 2 {
        return Err(EvalError::InvalidPlan("at least two folds are required".into()));
    }
    let n = labels.len();
    let groups: Vec<Vec<usize>> = if plan.stratified {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            by_class.entry(l).or_default().push(i);
        }
        if let Some((class, idx)) = by_class.iter().find(|(_, v)| v.len() < k) {
            return Err(EvalError::TooFewInstancesPerClass {
                class: class.to_string(),
                count: idx.len(),
                folds: k,
            });
        }
        by_class.into_values().collect()
    } else {
        if n < k {
            return Err(EvalError::TooFewInstancesPerClass {
                class: "*".into(),
                count: n,
                folds: k,
            });
        }
        vec![(0..n).collect()]
    };

    let mut fold = vec![0usize; n];
    match plan.split_mode {
        SplitMode::RandomWindow => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            // dealing continues across classes so fold sizes stay balanced
            let mut next = 0usize;
            for mut g in groups {
                g.shuffle(&mut rng);
                for i in g {
                    fold[i] = next % k;
                    next += 1;
                }
            }
        }
        SplitMode::BlockedTime => {
            for g in groups {
                let len = g.len();
                for (p, i) in g.into_iter().enumerate() {
                    fold[i] = p * k / len;
                }
            }
        }
    }
    Ok(fold)
}

/// Cross-validated metrics for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub spec: ModelSpec,
    pub plan: CvPlan,
    pub fit_normalizer_on: FitPolicy,
    pub n_instances: usize,
    pub n_features: usize,
    pub fold_accuracies: Vec<f64>,
    pub metrics: MetricsReport,
}

impl CvReport {
    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }
}

pub fn cross_validate(
    spec: &ModelSpec,
    matrix: &FeatureMatrix,
    plan: &CvPlan,
    fit_on: FitPolicy,
) -> Result<CvReport, EvalError> {
    let classes = matrix.classes();
    let folds = assign_folds(matrix.labels(), plan)?;
    let global_norm = match fit_on {
        FitPolicy::All => Some(NormalizationParams::fit(matrix)?),
        FitPolicy::Train => None,
    };
    let class_index = |l: &String| classes.binary_search(l).expect("label from this matrix");

    let per_fold: Vec<Result<ConfusionMatrix, EvalError>> = (0..plan.folds)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] != f).collect();
            let test_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] == f).collect();
            let mut train = matrix.select_rows(&train_idx);
            let mut test = matrix.select_rows(&test_idx);
            let norm = match &global_norm {
                Some(p) => p.clone(),
                None => NormalizationParams::fit(&train)?,
            };
            norm.apply_in_place(&mut train)?;
            norm.apply_in_place(&mut test)?;
            let model = models::train_with_classes(spec, &train, &classes)?;
            let predicted = model.predict_matrix(&test)?;
            let actual: Vec<usize> = test.labels().iter().map(class_index).collect();
            ConfusionMatrix::from_predictions(classes.clone(), &actual, &predicted)
        })
        .collect();

    let mut pooled = ConfusionMatrix::new(classes.clone());
    let mut fold_accuracies = Vec::with_capacity(plan.folds);
    for cm in per_fold {
        let cm = cm?;
        fold_accuracies.push(cm.accuracy());
        pooled.add(&cm)?;
    }
    Ok(CvReport {
        model: spec.label(),
        spec: spec.clone(),
        plan: plan.clone(),
        fit_normalizer_on: fit_on,
        n_instances: matrix.n_rows(),
        n_features: matrix.n_cols(),
        fold_accuracies,
        metrics: metrics(&pooled)?,
    })
}

/// Flat per-class table for plotting: one row per (model, class) plus an
/// `averaged` row per model. Undefined metrics are left empty.
pub fn write_class_table<W: std::io::Write>(
    reports: &[CvReport],
    writer: W,
) -> Result<(), csv::Error> {
    let cell = |p: &Percent| if p.undefined { String::new() } else { p.value.to_string() };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "class", "precision", "recall", "f1", "tp", "fp", "fn", "tn"])?;
    for r in reports {
        for c in &r.metrics.per_class {
            let k = c.counts;
            w.write_record([
                r.model.clone(),
                c.class.clone(),
                cell(&c.precision),
                cell(&c.recall),
                cell(&c.f1),
                k.tp.to_string(),
                k.fp.to_string(),
                k.fn_.to_string(),
                k.tn.to_string(),
            ])?;
        }
        let a = &r.metrics.averaged;
        w.write_record([
            r.model.clone(),
            "averaged".to_string(),
            cell(&a.precision),
            cell(&a.recall),
            cell(&a.f1),
            a.tp.to_string(),
            a.fp.to_string(),
            a.fn_.to_string(),
            a.tn.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
