//! Confusion-matrix metrics, cross-validation and baseline comparison.

pub mod compare;
pub mod confusion;
pub mod cv;

use thiserror::Error;

pub use compare::{baseline_compare, compare_accuracies, Comparison, ComparisonRow};
pub use confusion::{
    metrics, AveragedBinary, ClassCounts, ClassMetrics, ConfusionMatrix, MetricsReport, Percent,
};
pub use cv::{assign_folds, cross_validate, write_class_table, CvPlan, CvReport, SplitMode};

use crate::models::ModelError;
use crate::preprocess::PreprocessError;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("class index {index} out of range for {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("confusion matrix must be {0}x{0}")]
    ShapeMismatch(usize),
    #[error("confusion matrices have different classes")]
    ClassMismatch,
    #[error("{0} actual labels but {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("class {class:?} has {count} instances, fewer than the {folds} folds")]
    TooFewInstancesPerClass { class: String, count: usize, folds: usize },
    #[error("invalid cross-validation plan: {0}")]
    InvalidPlan(String),
    #[error("no report is named {0:?}, the designated baseline")]
    NoBaselineDesignated(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}
