//! Accuracy deltas against a designated baseline model.

use serde::{Deserialize, Serialize};

use super::cv::CvReport;
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub accuracy: f64,
    /// Accuracy minus baseline accuracy, in percentage points.
    pub delta: f64,
    pub better_than_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub baseline_accuracy: f64,
    /// Highest accuracy first.
    pub rows: Vec<ComparisonRow>,
    /// Models that do not beat the baseline.
    pub not_better: Vec<String>,
}

/// Ranks `(model, accuracy)` pairs against the entry named `baseline`.
pub fn compare_accuracies(
    entries: &[(String, f64)],
    baseline: &str,
) -> Result<Comparison, EvalError> {
    let baseline_accuracy = entries
        .iter()
        .find(|(m, _)| m == baseline)
        .map(|(_, a)| *a)
        .ok_or_else(|| EvalError::NoBaselineDesignated(baseline.to_string()))?;
    let mut rows: Vec<ComparisonRow> = entries
        .iter()
        .map(|(model, accuracy)| ComparisonRow {
            model: model.clone(),
            accuracy: *accuracy,
            delta: accuracy - baseline_accuracy,
            better_than_baseline: model != baseline && *accuracy > baseline_accuracy,
        })
        .collect();
    rows.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy));
    let not_better = rows
        .iter()
        .filter(|r| !r.better_than_baseline && r.model != baseline)
        .map(|r| r.model.clone())
        .collect();
    Ok(Comparison { baseline: baseline.to_string(), baseline_accuracy, rows, not_better })
}

pub fn baseline_compare(reports: &[CvReport], baseline: &str) -> Result<Comparison, EvalError> {
    let entries: Vec<(String, f64)> =
        reports.iter().map(|r| (r.model.clone(), r.accuracy())).collect();
    compare_accuracies(&entries, baseline)
}
