//! End-to-end runs driven by a flat, serializable [`RunConfig`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eval::{
    baseline_compare, cross_validate, write_class_table, Comparison, CvPlan, CvReport, SplitMode,
};
use crate::ingest::{self, LoadOptions, TripDataset};
use crate::matrix::FeatureMatrix;
use crate::models::{self, KnnConfig, ModelKind, ModelSpec, TrainedModel};
use crate::preprocess::{
    extract_windows, select_features, FeatureAlias, FeatureSelectionReport, FitPolicy,
    NormalizationParams, SelectionMode, SelectionParams, Statistic, WindowSpec,
};
use crate::{Error, IngestError};

/// How features are chosen: `fixed15`, `rank:K`, or `list:a,b,c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureMode {
    Fixed15,
    Ranked(usize),
    List(Vec<String>),
}

impl FeatureMode {
    pub fn selection_mode(&self) -> SelectionMode {
        match self {
            FeatureMode::Fixed15 => SelectionMode::fixed15(),
            FeatureMode::Ranked(k) => SelectionMode::Ranked { k: *k },
            FeatureMode::List(names) => SelectionMode::Fixed {
                features: names
                    .iter()
                    .map(|n| FeatureAlias { name: n.clone(), aliases: Vec::new() })
                    .collect(),
            },
        }
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "fixed15" {
            return Ok(FeatureMode::Fixed15);
        }
        if let Some(k) = s.strip_prefix("rank:") {
            return match k.parse::<usize>() {
                Ok(k) if k > 0 => Ok(FeatureMode::Ranked(k)),
                _ => Err(format!("bad feature count in {s:?}")),
            };
        }
        if let Some(list) = s.strip_prefix("list:") {
            let names: Vec<String> = list
                .split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(String::from)
                .collect();
            if names.is_empty() {
                return Err("empty feature list".into());
            }
            return Ok(FeatureMode::List(names));
        }
        Err(format!("unknown feature mode {s:?} (expected fixed15, rank:K or list:a,b)"))
    }
}

impl TryFrom<String> for FeatureMode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<FeatureMode> for String {
    fn from(m: FeatureMode) -> String {
        m.to_string()
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::Fixed15 => f.write_str("fixed15"),
            FeatureMode::Ranked(k) => write!(f, "rank:{k}"),
            FeatureMode::List(names) => write!(f, "list:{}", names.join(",")),
        }
    }
}

/// Everything needed to repeat a run. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub label_column: String,
    pub exclude_columns: Vec<String>,
    /// Labels to keep; empty keeps all.
    pub keep_labels: Vec<String>,
    pub features: FeatureMode,
    pub window: usize,
    pub stride: usize,
    pub stats: Vec<Statistic>,
    pub fit_normalizer_on: FitPolicy,
    pub models: Vec<ModelKind>,
    /// Neighbour count for k-NN.
    pub k: usize,
    pub folds: usize,
    pub stratified: bool,
    pub split: SplitMode,
    pub seed: u64,
    pub report: Option<PathBuf>,
    /// Per-class metrics as CSV.
    pub table: Option<PathBuf>,
    /// Directory for models trained on all windows, one file per kind.
    pub model_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let load = LoadOptions::default();
        let window = WindowSpec::default();
        let plan = CvPlan::default();
        Self {
            input: PathBuf::new(),
            label_column: load.label_column,
            exclude_columns: load.exclude_columns,
            keep_labels: Vec::new(),
            features: FeatureMode::Fixed15,
            window: window.length,
            stride: window.stride,
            stats: window.statistics,
            fit_normalizer_on: FitPolicy::Train,
            models: ModelKind::ALL.to_vec(),
            k: KnnConfig::default().k,
            folds: plan.folds,
            stratified: plan.stratified,
            split: plan.split_mode,
            seed: plan.seed,
            report: None,
            table: None,
            model_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Two drivers, A and D.
    Table6,
    /// All ten drivers.
    Table7,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table6" => Ok(Preset::Table6),
            "table7" => Ok(Preset::Table7),
            _ => Err(format!("unknown preset {s:?} (expected table6 or table7)")),
        }
    }
}

impl RunConfig {
    pub fn preset(preset: Preset, input: impl Into<PathBuf>) -> Self {
        let keep_labels = match preset {
            Preset::Table6 => vec!["A".to_string(), "D".to_string()],
            Preset::Table7 => Vec::new(),
        };
        Self { input: input.into(), keep_labels, seed: 1, ..Self::default() }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            label_column: self.label_column.clone(),
            exclude_columns: self.exclude_columns.clone(),
            ..LoadOptions::default()
        }
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec { length: self.window, stride: self.stride, statistics: self.stats.clone() }
    }

    pub fn cv_plan(&self) -> CvPlan {
        CvPlan {
            folds: self.folds,
            stratified: self.stratified,
            seed: self.seed,
            split_mode: self.split,
        }
    }

    pub fn model_spec(&self, kind: ModelKind) -> ModelSpec {
        match ModelSpec::default_for(kind, self.seed) {
            ModelSpec::Knn(_) => ModelSpec::Knn(KnnConfig { k: self.k }),
            ModelSpec::MajorityVote { members } => ModelSpec::MajorityVote {
                members: members
                    .into_iter()
                    .map(|m| match m {
                        ModelSpec::Knn(_) => ModelSpec::Knn(KnnConfig { k: self.k }),
                        other => other,
                    })
                    .collect(),
            },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::Config("no input path given".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        self.window_spec().validate()?;
        Ok(())
    }
}

/// Shape of the windowed data set that was cross-validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub raw_rows: usize,
    pub windows: usize,
    pub dropped_mixed_label: usize,
    pub features: Vec<String>,
    /// Share of windows per class; the majority share is what ZeroR scores.
    pub class_distribution: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub selection: FeatureSelectionReport,
    pub data: WindowSummary,
    pub results: Vec<CvReport>,
    /// Present when ZeroR was among the models.
    pub comparison: Option<Comparison>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A trained model together with the scaling it expects its inputs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub normalizer: NormalizationParams,
    pub model: TrainedModel,
}

impl ModelBundle {
    /// Fits the normalizer on `m` and trains on the scaled rows.
    pub fn fit(spec: &ModelSpec, m: &FeatureMatrix) -> Result<Self, Error> {
        let normalizer = NormalizationParams::fit(m)?;
        let scaled = normalizer.apply(m)?;
        let model = models::train(spec, &scaled)?;
        Ok(Self { normalizer, model })
    }

    pub fn predict(&self, row: &[f64]) -> Result<&str, Error> {
        Ok(self.model.predict(&self.normalizer.scale_row(row))?)
    }
}

pub fn load_input(config: &RunConfig) -> Result<TripDataset, Error> {
    let file = File::open(&config.input).map_err(|e| Error::io(&config.input, e))?;
    let ds = ingest::load_dataset(BufReader::new(file), &config.load_options())?;
    if config.keep_labels.is_empty() {
        return Ok(ds);
    }
    let keep: BTreeSet<String> = config.keep_labels.iter().cloned().collect();
    Ok(ingest::filter_labels(&ds, &keep)?)
}

/// Feature selection and windowing, without normalization.
pub fn prepare(
    ds: &TripDataset,
    config: &RunConfig,
) -> Result<(FeatureSelectionReport, FeatureMatrix, WindowSummary), Error> {
    let selection =
        select_features(ds, &config.features.selection_mode(), &SelectionParams::default())?;
    let windows = extract_windows(ds, &selection.kept, &config.window_spec())?;
    let summary = WindowSummary {
        raw_rows: ds.len(),
        windows: windows.matrix.n_rows(),
        dropped_mixed_label: windows.dropped_mixed_label,
        features: windows.matrix.column_names().to_vec(),
        class_distribution: ingest::proportions(windows.matrix.labels().iter().map(String::as_str)),
    };
    Ok((selection, windows.matrix, summary))
}

/// Cross-validates every configured model on an already prepared matrix.
pub fn evaluate(matrix: &FeatureMatrix, config: &RunConfig) -> Result<Vec<CvReport>, Error> {
    let plan = config.cv_plan();
    config
        .models
        .iter()
        .map(|&kind| {
            Ok(cross_validate(&config.model_spec(kind), matrix, &plan, config.fit_normalizer_on)?)
        })
        .collect()
}

pub fn compare_to_zeror(results: &[CvReport]) -> Option<Comparison> {
    baseline_compare(results, ModelKind::ZeroR.name()).ok()
}

/// Ingest, select, window, cross-validate, and write the configured artifacts.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport, Error> {
    config.validate()?;
    let ds = load_input(config)?;
    let (selection, matrix, data) = prepare(&ds, config)?;
    let results = evaluate(&matrix, config)?;
    let comparison = compare_to_zeror(&results);
    let report = RunReport { config: config.clone(), selection, data, results, comparison };

    if let Some(dir) = &config.model_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for &kind in &config.models {
            let bundle = ModelBundle::fit(&config.model_spec(kind), &matrix)?;
            write_json(&dir.join(format!("{}.json", kind.name())), &bundle)?;
        }
    }
    if let Some(path) = &config.report {
        write_json(path, &report)?;
    }
    if let Some(path) = &config.table {
        write_table(path, &report.results)?;
    }
    Ok(report)
}

pub fn write_table(path: &Path, results: &[CvReport]) -> Result<(), Error> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_class_table(results, f).map_err(IngestError::from)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_mode_strings() {
        for s in ["fixed15", "rank:7", "list:a,b"] {
            assert_eq!(s.parse::<FeatureMode>().unwrap().to_string(), s);
        }
        assert!("rank:0".parse::<FeatureMode>().is_err());
        assert!("top5".parse::<FeatureMode>().is_err());
    }

    #[test]
    fn config_round_trips_and_fills_defaults() {
        let c = RunConfig::preset(Preset::Table6, "x.csv");
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"input":"y.csv","k":3}"#).unwrap();
        assert_eq!(partial.k, 3);
        assert_eq!(partial.window, 60);
        assert!(serde_json::from_str::<RunConfig>(r#"{"colour":1}"#).is_err());
    }

    #[test]
    fn presets() {
        let t6 = RunConfig::preset(Preset::Table6, "d.csv");
        assert_eq!(t6.keep_labels, ["A", "D"]);
        assert_eq!((t6.seed, t6.folds), (1, 10));
        assert_eq!(t6.features, FeatureMode::Fixed15);
        assert!(RunConfig::preset(Preset::Table7, "d.csv").keep_labels.is_empty());
    }

    #[test]
    fn k_reaches_vote_members() {
        let c = RunConfig { k: 5, ..RunConfig::default() };
        let ModelSpec::MajorityVote { members } = c.model_spec(ModelKind::MajorityVote) else {
            unreachable!()
        };
        assert!(members.contains(&ModelSpec::Knn(KnnConfig { k: 5 })));
    }

    #[test]
    fn missing_input_names_the_path() {
        let c = RunConfig { input: "/nonexistent/trips.csv".into(), ..RunConfig::default() };
        let e = run_pipeline(&c).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/trips.csv"), "{e}");
        assert_eq!(e.kind(), crate::ErrorKind::Data);
        let e = run_pipeline(&RunConfig::default()).unwrap_err();
        assert_eq!(e.kind(), crate::ErrorKind::Usage);
    }
}
