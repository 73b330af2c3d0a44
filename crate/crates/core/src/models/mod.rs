//! Classifiers behind one train/predict contract.
//!
//! [`train`] turns a [`ModelSpec`] and a labelled [`FeatureMatrix`] into a
//! [`TrainedModel`]. Every model exposes a class distribution through
//! [`TrainedModel::predict_proba`]; [`TrainedModel::predict`] is its argmax,
//! with ties going to the class that sorts first.

mod adaboost;
mod knn;
mod logistic;
mod naive_bayes;
mod rep_tree;
mod svm;
mod zeror;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;

pub use adaboost::{AdaBoost, AdaBoostConfig, Stump};
pub use knn::{Knn, KnnConfig};
pub use logistic::{LogisticConfig, LogisticObjective, LogisticRegression};
pub use naive_bayes::{GaussianNb, NaiveBayesConfig};
pub use rep_tree::{PruneSummary, RepTree, RepTreeConfig, TreeNode};
pub use svm::{hinge_loss, LinearSvm, SvmConfig, SvmObjective};
pub use zeror::ZeroR;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{0} needs at least two classes in the training set")]
    SingleClassForDiscriminative(ModelKind),
    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label {0:?} is not in the class alphabet")]
    UnknownClass(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model serialization: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    ZeroR,
    Knn,
    NaiveBayes,
    Logistic,
    Svm,
    RepTree,
    AdaBoost,
    MajorityVote,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::NaiveBayes,
        ModelKind::Logistic,
        ModelKind::Knn,
        ModelKind::RepTree,
        ModelKind::Svm,
        ModelKind::ZeroR,
        ModelKind::AdaBoost,
        ModelKind::MajorityVote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ZeroR => "zeror",
            ModelKind::Knn => "knn",
            ModelKind::NaiveBayes => "nb",
            ModelKind::Logistic => "lr",
            ModelKind::Svm => "svm",
            ModelKind::RepTree => "rep",
            ModelKind::AdaBoost => "adaboost",
            ModelKind::MajorityVote => "vote",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for ModelKind {
    type Error = ModelError;

    fn try_from(s: String) -> Result<Self, ModelError> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.name().to_string()
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "zeror" => ModelKind::ZeroR,
            "knn" | "k-nn" => ModelKind::Knn,
            "nb" | "naive_bayes" | "naivebayes" => ModelKind::NaiveBayes,
            "lr" | "logistic" => ModelKind::Logistic,
            "svm" => ModelKind::Svm,
            "rep" | "rep_tree" | "reptree" => ModelKind::RepTree,
            "adaboost" => ModelKind::AdaBoost,
            "vote" | "majority_vote" => ModelKind::MajorityVote,
            other => return Err(ModelError::UnknownKind(other.to_string())),
        })
    }
}

/// What to train, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelSpec {
    #[serde(rename = "zeror")]
    ZeroR,
    #[serde(rename = "knn")]
    Knn(KnnConfig),
    #[serde(rename = "nb")]
    NaiveBayes(NaiveBayesConfig),
    #[serde(rename = "lr")]
    Logistic(LogisticConfig),
    #[serde(rename = "svm")]
    Svm(SvmConfig),
    #[serde(rename = "rep")]
    RepTree(RepTreeConfig),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostConfig),
    #[serde(rename = "vote")]
    MajorityVote { members: Vec<ModelSpec> },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::ZeroR => ModelKind::ZeroR,
            ModelSpec::Knn(_) => ModelKind::Knn,
            ModelSpec::NaiveBayes(_) => ModelKind::NaiveBayes,
            ModelSpec::Logistic(_) => ModelKind::Logistic,
            ModelSpec::Svm(_) => ModelKind::Svm,
            ModelSpec::RepTree(_) => ModelKind::RepTree,
            ModelSpec::AdaBoost(_) => ModelKind::AdaBoost,
            ModelSpec::MajorityVote { .. } => ModelKind::MajorityVote,
        }
    }

    /// Default hyperparameters for `kind`; seeded kinds take `seed`.
    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::ZeroR => ModelSpec::ZeroR,
            ModelKind::Knn => ModelSpec::Knn(KnnConfig::default()),
            ModelKind::NaiveBayes => ModelSpec::NaiveBayes(NaiveBayesConfig::default()),
            ModelKind::Logistic => ModelSpec::Logistic(LogisticConfig::default()),
            ModelKind::Svm => ModelSpec::Svm(SvmConfig { seed, ..SvmConfig::default() }),
            ModelKind::RepTree => {
                ModelSpec::RepTree(RepTreeConfig { seed, ..RepTreeConfig::default() })
            }
            ModelKind::AdaBoost => ModelSpec::AdaBoost(AdaBoostConfig::default()),
            ModelKind::MajorityVote => ModelSpec::MajorityVote {
                members: [
                    ModelKind::NaiveBayes,
                    ModelKind::Logistic,
                    ModelKind::Knn,
                    ModelKind::RepTree,
                    ModelKind::Svm,
                ]
                .into_iter()
                .map(|k| ModelSpec::default_for(k, seed))
                .collect(),
            },
        }
    }

    /// Short label used in reports, e.g. `knn(k=3)`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Knn(c) if c.k != 1 => format!("knn(k={})", c.k),
            other => other.kind().name().to_string(),
        }
    }
}

/// Learned state, one variant per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelParams {
    #[serde(rename = "zeror")]
    ZeroR(ZeroR),
    #[serde(rename = "knn")]
    Knn(Knn),
    #[serde(rename = "nb")]
    NaiveBayes(GaussianNb),
    #[serde(rename = "lr")]
    Logistic(LogisticRegression),
    #[serde(rename = "svm")]
    Svm(LinearSvm),
    #[serde(rename = "rep")]
    RepTree(RepTree),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoost),
    #[serde(rename = "vote")]
    MajorityVote { members: Vec<TrainedModel> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub classes: Vec<String>,
    pub n_features: usize,
    pub params: ModelParams,
}

/// Borrowed training data with labels mapped to class indices.
pub(crate) struct Samples<'a> {
    pub x: &'a [f64],
    pub d: usize,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl<'a> Samples<'a> {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }
}

/// Trains on `m` with the class alphabet taken from its labels.
pub fn train(spec: &ModelSpec, m: &FeatureMatrix) -> Result<TrainedModel, ModelError> {
    train_with_classes(spec, m, &m.classes())
}

/// Trains with an explicit class alphabet, which may include classes absent
/// from `m` (as happens inside a cross-validation fold).
pub fn train_with_classes(
    spec: &ModelSpec,
    m: &FeatureMatrix,
    classes: &[String],
) -> Result<TrainedModel, ModelError> {
    if m.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let d = m.n_cols();
    if let Some(pos) = m.values().iter().position(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteFeature { row: pos / d.max(1), column: pos % d.max(1) });
    }
    let y = m
        .labels()
        .iter()
        .map(|l| classes.binary_search(l).map_err(|_| ModelError::UnknownClass(l.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = Samples { x: m.values(), d, y, n_classes: classes.len() };
    let present = samples.class_counts().iter().filter(|&&c| c > 0).count();
    fit(spec, &samples, present, classes)
}

fn fit(
    spec: &ModelSpec,
    s: &Samples<'_>,
    present: usize,
    classes: &[String],
) -> Result<TrainedModel, ModelError> {
    let needs_two = !matches!(spec, ModelSpec::ZeroR);
    if needs_two && present < 2 {
        return Err(ModelError::SingleClassForDiscriminative(spec.kind()));
    }
    let params = match spec {
        ModelSpec::ZeroR => ModelParams::ZeroR(ZeroR::fit(s)),
        ModelSpec::Knn(c) => ModelParams::Knn(Knn::fit(c, s)?),
        ModelSpec::NaiveBayes(c) => ModelParams::NaiveBayes(GaussianNb::fit(c, s)),
        ModelSpec::Logistic(c) => ModelParams::Logistic(LogisticRegression::fit(c, s)?),
        ModelSpec::Svm(c) => ModelParams::Svm(LinearSvm::fit(c, s)?),
        ModelSpec::RepTree(c) => ModelParams::RepTree(RepTree::fit(c, s)?),
        ModelSpec::AdaBoost(c) => ModelParams::AdaBoost(AdaBoost::fit(c, s)?),
        ModelSpec::MajorityVote { members } => {
            if members.is_empty() {
                return Err(ModelError::InvalidConfig("vote needs at least one member".into()));
            }
            let trained = members
                .iter()
                .map(|m| fit(m, s, present, classes))
                .collect::<Result<Vec<_>, _>>()?;
            ModelParams::MajorityVote { members: trained }
        }
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        classes: classes.to_vec(),
        n_features: s.d,
        params,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    fn check_dim(&self, row: &[f64]) -> Result<(), ModelError> {
        if row.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        Ok(())
    }

    /// Class distribution for `row`, in the order of [`TrainedModel::classes`].
    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_dim(row)?;
        Ok(self.proba_unchecked(row))
    }

    fn proba_unchecked(&self, row: &[f64]) -> Vec<f64> {
        let k = self.classes.len();
        match &self.params {
            ModelParams::ZeroR(m) => m.proba(),
            ModelParams::Knn(m) => m.proba(row, k),
            ModelParams::NaiveBayes(m) => m.proba(row),
            ModelParams::Logistic(m) => m.proba(row),
            ModelParams::Svm(m) => m.proba(row),
            ModelParams::RepTree(m) => m.proba(row),
            ModelParams::AdaBoost(m) => m.proba(row, k),
            ModelParams::MajorityVote { members } => {
                let mut votes = vec![0.0; k];
                for member in members {
                    votes[argmax(&member.proba_unchecked(row))] += 1.0;
                }
                let n = members.len() as f64;
                votes.iter_mut().for_each(|v| *v /= n);
                votes
            }
        }
    }

    pub fn predict_index(&self, row: &[f64]) -> Result<usize, ModelError> {
        Ok(argmax(&self.predict_proba(row)?))
    }

    pub fn predict(&self, row: &[f64]) -> Result<&str, ModelError> {
        Ok(&self.classes[self.predict_index(row)?])
    }

    /// Predicted class index for every row of `m`.
    pub fn predict_matrix(&self, m: &FeatureMatrix) -> Result<Vec<usize>, ModelError> {
        use rayon::prelude::*;
        if m.n_cols() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                found: m.n_cols(),
            });
        }
        Ok((0..m.n_rows())
            .into_par_iter()
            .map(|i| argmax(&self.proba_unchecked(m.row(i))))
            .collect())
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string_pretty(self).map_err(|e| ModelError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let m: TrainedModel =
            serde_json::from_str(s).map_err(|e| ModelError::Serialization(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(m.format_version));
        }
        Ok(m)
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Straight-line distance between two points.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    Ok(squared_distance(x, y).sqrt())
}

pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean squared residual.
pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64, ModelError> {
    if actual.len() != predicted.len() {
        return Err(ModelError::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let ss: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(ss / actual.len() as f64)
}

/// Numerically stable softmax.
pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
