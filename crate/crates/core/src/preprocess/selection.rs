//! Feature selection: a fixed reference list or correlation ranking, with
//! every discarded feature classified as homogeneous, irrelevant,
//! superfluous or correlated.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::stats::{pearson, population_std};
use super::PreprocessError;
use crate::ingest::TripDataset;

/// A reference feature and the column names it may appear under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAlias {
    pub name: String,
    pub aliases: Vec<String>,
}

impl FeatureAlias {
    fn new(name: &str, aliases: &[&str]) -> Self {
        Self { name: name.to_string(), aliases: aliases.iter().map(|s| s.to_string()).collect() }
    }

    fn matches(&self, column: &str) -> bool {
        let c = squash(column);
        squash(&self.name) == c || self.aliases.iter().any(|a| squash(a) == c)
    }
}

/// Lowercase alphanumerics only, so `Engine_torque` matches "Engine torque".
fn squash(s: &str) -> String {
    s.chars().filter(char::is_ascii_alphanumeric).map(|c| c.to_ascii_lowercase()).collect()
}

/// The fifteen driving-behaviour features used for driver identification,
/// with the column spellings found in the Ocslab KIA Soul logs.
pub fn reference_features() -> Vec<FeatureAlias> {
    vec![
        FeatureAlias::new("Long term fuel trim bank1", &["Long_Term_Fuel_Trim_Bank1"]),
        FeatureAlias::new("Intake air pressure", &["Intake_air_pressure"]),
        FeatureAlias::new("Accelerator pedal value", &["Accelerator_Pedal_value"]),
        FeatureAlias::new("Fuel consumption", &["Fuel_consumption"]),
        FeatureAlias::new("Maximum indicated engine torque", &["Maximum_indicated_engine_torque"]),
        FeatureAlias::new("Engine torque", &["Engine_torque"]),
        FeatureAlias::new("Calculated load value", &["Calculated_LOAD_value"]),
        FeatureAlias::new("Friction torque", &["Torque_of_friction"]),
        FeatureAlias::new("Activation of air compressor", &["Activation_of_Air_compressor"]),
        FeatureAlias::new("Engine coolant temperature", &["Engine_coolant_temperature"]),
        FeatureAlias::new(
            "Transmission oil temperature",
            &["Transmission_oil_temperature", "Engine_coolant_temperature.1"],
        ),
        FeatureAlias::new("Wheel velocity front left-hand", &["Wheel_velocity_front_left-hand"]),
        FeatureAlias::new("Wheel velocity front right-hand", &["Wheel_velocity_front_right-hand"]),
        FeatureAlias::new("Wheel velocity rear left-hand", &["Wheel_velocity_rear_left-hand"]),
        FeatureAlias::new("Torque converter speed", &["Torque_converter_speed"]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionMode {
    Fixed { features: Vec<FeatureAlias> },
    Ranked { k: usize },
}

impl SelectionMode {
    pub fn fixed15() -> Self {
        SelectionMode::Fixed { features: reference_features() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    /// Scores below this mark a feature irrelevant.
    pub irrelevance_threshold: f64,
    /// |r| above this against a kept feature marks a feature correlated.
    pub correlation_threshold: f64,
    /// Recorded for provenance only; scoring is deterministic.
    pub evaluator_folds: usize,
    pub evaluator_seed: u64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            irrelevance_threshold: 0.01,
            correlation_threshold: 0.95,
            evaluator_folds: 10,
            evaluator_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelectionReport {
    pub kept: Vec<String>,
    pub discarded_homogeneous: Vec<String>,
    pub discarded_irrelevant: Vec<String>,
    pub discarded_superfluous: Vec<String>,
    pub discarded_correlated: Vec<String>,
    pub scores: BTreeMap<String, f64>,
    pub mode: SelectionMode,
    pub params: SelectionParams,
}

impl FeatureSelectionReport {
    pub fn discarded(&self) -> impl Iterator<Item = &String> {
        self.discarded_homogeneous
            .iter()
            .chain(&self.discarded_irrelevant)
            .chain(&self.discarded_superfluous)
            .chain(&self.discarded_correlated)
    }
}

/// Class-prior weighted mean of |r| between the feature and each one-vs-rest
/// class indicator.
pub fn class_correlation(column: &[f64], labels: &[&str]) -> f64 {
    let n = labels.len() as f64;
    let classes: BTreeSet<&str> = labels.iter().copied().collect();
    classes
        .into_iter()
        .map(|c| {
            let indicator: Vec<f64> = labels.iter().map(|l| f64::from(u8::from(*l == c))).collect();
            let prior = indicator.iter().sum::<f64>() / n;
            prior * pearson(column, &indicator).abs()
        })
        .sum()
}

pub fn select_features(
    ds: &TripDataset,
    mode: &SelectionMode,
    params: &SelectionParams,
) -> Result<FeatureSelectionReport, PreprocessError> {
    if ds.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    let names = ds.column_names();
    let columns: Vec<Vec<f64>> = (0..names.len()).map(|j| ds.column(j)).collect();
    let labels: Vec<&str> = ds.labels().collect();
    let constant: Vec<bool> = columns.iter().map(|c| population_std(c) == 0.0).collect();
    let scores: Vec<f64> = columns
        .iter()
        .zip(&constant)
        .map(|(c, &k)| if k { 0.0 } else { class_correlation(c, &labels) })
        .collect();

    let mut report = FeatureSelectionReport {
        kept: Vec::new(),
        discarded_homogeneous: Vec::new(),
        discarded_irrelevant: Vec::new(),
        discarded_superfluous: Vec::new(),
        discarded_correlated: Vec::new(),
        scores: names.iter().cloned().zip(scores.iter().copied()).collect(),
        mode: mode.clone(),
        params: params.clone(),
    };

    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut kept_idx: Vec<usize> = Vec::new();
    match mode {
        SelectionMode::Fixed { features } => {
            for f in features {
                let j = (0..names.len())
                    .find(|&j| f.matches(&names[j]))
                    .ok_or_else(|| PreprocessError::UnknownFeatureName(f.name.clone()))?;
                if !kept_idx.contains(&j) {
                    kept_idx.push(j);
                }
            }
            for &j in &order {
                if kept_idx.contains(&j) {
                    continue;
                }
                let bucket = classify_discard(j, &columns, &constant, &scores, &kept_idx, params)
                    .unwrap_or(Discard::Irrelevant);
                report.push(bucket, &names[j]);
            }
        }
        SelectionMode::Ranked { k } => {
            for &j in &order {
                match classify_discard(j, &columns, &constant, &scores, &kept_idx, params) {
                    Some(bucket) => report.push(bucket, &names[j]),
                    None if kept_idx.len() < *k => kept_idx.push(j),
                    None => report.push(Discard::Irrelevant, &names[j]),
                }
            }
        }
    }
    report.kept = kept_idx.iter().map(|&j| names[j].clone()).collect();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Discard {
    Homogeneous,
    Irrelevant,
    Superfluous,
    Correlated,
}

impl FeatureSelectionReport {
    fn push(&mut self, bucket: Discard, name: &str) {
        let target = match bucket {
            Discard::Homogeneous => &mut self.discarded_homogeneous,
            Discard::Irrelevant => &mut self.discarded_irrelevant,
            Discard::Superfluous => &mut self.discarded_superfluous,
            Discard::Correlated => &mut self.discarded_correlated,
        };
        target.push(name.to_string());
    }
}

fn classify_discard(
    j: usize,
    columns: &[Vec<f64>],
    constant: &[bool],
    scores: &[f64],
    kept: &[usize],
    params: &SelectionParams,
) -> Option<Discard> {
    if constant[j] {
        return Some(Discard::Homogeneous);
    }
    if kept.iter().any(|&k| columns[k] == columns[j]) {
        return Some(Discard::Superfluous);
    }
    if kept.iter().any(|&k| {
        !constant[k] && pearson(&columns[k], &columns[j]).abs() > params.correlation_threshold
    }) {
        return Some(Discard::Correlated);
    }
    if scores[j] < params.irrelevance_threshold {
        return Some(Discard::Irrelevant);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_dataset, LoadOptions};

    fn ds(csv: &str) -> TripDataset {
        load_dataset(csv.as_bytes(), &LoadOptions::default()).unwrap()
    }

    fn synthetic() -> TripDataset {
        // signal separates the classes, twin duplicates it, flat is constant,
        // near tracks signal closely, noise is unrelated
        let mut s = String::from("signal,twin,flat,near,noise,Class\n");
        for i in 0..40 {
            let label = if i < 20 { "A" } else { "D" };
            let signal = if i < 20 { i as f64 } else { 100.0 + i as f64 };
            let near = signal + (i % 5) as f64 * 2.0;
            let noise = [3.0, -1.0, 4.0, -1.0, -5.0, 9.0, -2.0, 6.0][i % 8];
            s += &format!("{signal},{signal},7,{near},{noise},{label}\n");
        }
        ds(&s)
    }

    fn assert_partition(r: &FeatureSelectionReport, ds: &TripDataset) {
        let mut all: Vec<&String> = r.kept.iter().chain(r.discarded()).collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n, "sets overlap");
        let mut names: Vec<&String> = ds.column_names().iter().collect();
        names.sort();
        assert_eq!(all, names);
        assert_eq!(r.scores.len(), ds.dimension());
    }

    #[test]
    fn ranked_classifies_discards() {
        let d = synthetic();
        let r = select_features(&d, &SelectionMode::Ranked { k: 15 }, &SelectionParams::default())
            .unwrap();
        assert_partition(&r, &d);
        assert_eq!(r.kept[0], "signal");
        assert_eq!(r.discarded_superfluous, ["twin"]);
        assert_eq!(r.discarded_homogeneous, ["flat"]);
        assert_eq!(r.scores["flat"], 0.0);
        assert_eq!(r.discarded_correlated, ["near"]);
        assert!(r.scores["signal"] > r.scores["noise"]);
    }

    #[test]
    fn ranked_top_k_cutoff() {
        let d = synthetic();
        let r = select_features(&d, &SelectionMode::Ranked { k: 1 }, &SelectionParams::default())
            .unwrap();
        assert_eq!(r.kept, ["signal"]);
        assert_partition(&r, &d);
    }

    #[test]
    fn fixed_list_keeps_requested_order() {
        let d = synthetic();
        let mode = SelectionMode::Fixed {
            features: vec![FeatureAlias::new("noise", &[]), FeatureAlias::new("Signal", &[])],
        };
        let r = select_features(&d, &mode, &SelectionParams::default()).unwrap();
        assert_eq!(r.kept, ["noise", "signal"]);
        assert_partition(&r, &d);
        assert!(r.discarded_superfluous.contains(&"twin".to_string()));

        let bad = SelectionMode::Fixed { features: vec![FeatureAlias::new("rpm", &[])] };
        assert_eq!(
            select_features(&d, &bad, &SelectionParams::default()),
            Err(PreprocessError::UnknownFeatureName("rpm".into()))
        );
    }

    #[test]
    fn reference_list_matches_ocslab_header() {
        let header = "Long_Term_Fuel_Trim_Bank1,Intake_air_pressure,Accelerator_Pedal_value,\
Fuel_consumption,Maximum_indicated_engine_torque,Engine_torque,Calculated_LOAD_value,\
Torque_of_friction,Activation_of_Air_compressor,Engine_coolant_temperature,\
Transmission_oil_temperature,Wheel_velocity_front_left-hand,Wheel_velocity_front_right-hand,\
Wheel_velocity_rear_left-hand,Torque_converter_speed,Engine_speed";
        let cols: Vec<&str> = header.split(',').collect();
        let feats = reference_features();
        assert_eq!(feats.len(), 15);
        for f in &feats {
            assert_eq!(cols.iter().filter(|c| f.matches(c)).count(), 1, "{}", f.name);
        }
    }

    #[test]
    fn binary_score_is_plain_correlation() {
        let col = [1.0, 2.0, 3.0, 10.0, 11.0, 13.0];
        let labels = ["A", "A", "A", "D", "D", "D"];
        let ind: Vec<f64> = labels.iter().map(|l| f64::from(u8::from(*l == "D"))).collect();
        let r = pearson(&col, &ind).abs();
        assert!((class_correlation(&col, &labels) - r).abs() < 1e-12);
    }
}
