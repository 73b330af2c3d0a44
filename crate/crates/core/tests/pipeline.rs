mod common;

use driverid::eval::SplitMode;
use driverid::models::ModelKind;
use driverid::pipeline::{read_json, run_pipeline, FeatureMode, ModelBundle, RunConfig, RunReport};
use driverid::ErrorKind;

fn config(drivers: &[&str], rows: usize) -> (tempfile::TempDir, RunConfig) {
    let (dir, input) = common::write_temp("trips.csv", &common::trip_log(drivers, rows, 3));
    let c = RunConfig { input, window: 12, stride: 4, folds: 5, ..RunConfig::default() };
    (dir, c)
}

#[test]
fn fixed15_run_on_ocslab_shaped_log() {
    let (_dir, c) = config(&["A", "B", "C", "D"], 120);
    let r = run_pipeline(&c).unwrap();
    assert_eq!(r.selection.kept.len(), 15);
    assert!(r.selection.kept.contains(&"Engine_coolant_temperature.1".to_string()));
    assert_eq!(r.data.features.len(), 45);
    assert!(r.data.features.iter().any(|f| f == "Engine_torque_median"));
    // 28 windows per driver; windows straddling a driver change are dropped
    assert_eq!(r.data.windows, 4 * 28);
    assert!(r.data.dropped_mixed_label > 0);
    assert_eq!(r.results.len(), ModelKind::ALL.len());

    let cmp = r.comparison.as_ref().unwrap();
    assert_eq!(cmp.baseline, "zeror");
    // balanced classes: each fold's majority is decided by small count differences
    assert!(cmp.baseline_accuracy < 30.0, "{}", cmp.baseline_accuracy);
    for m in ["knn", "rep", "lr", "svm", "nb"] {
        let acc = r.results.iter().find(|x| x.model == m).unwrap().accuracy();
        assert!(acc > 90.0, "{m}: {acc}");
    }
}

#[test]
fn ranked_selection_drops_constant_and_duplicate_channels() {
    let (_dir, mut c) = config(&["A", "D"], 100);
    c.features = FeatureMode::Ranked(40);
    c.models = vec![ModelKind::ZeroR, ModelKind::Knn];
    let r = run_pipeline(&c).unwrap();
    assert_eq!(r.selection.discarded_homogeneous, ["Flat_sensor"]);
    assert!(!r.selection.kept.iter().any(|k| k == "Time(s)" || k == "PathOrder"));
    let kept_torque = r.selection.kept.iter().filter(|k| k.contains("orque")).count();
    assert!(kept_torque >= 1);
    assert_eq!(
        r.selection.discarded_superfluous.len()
            + r.selection.discarded_correlated.len()
            + r.selection.discarded_irrelevant.len()
            + r.selection.discarded_homogeneous.len()
            + r.selection.kept.len(),
        17
    );
}

#[test]
fn keep_labels_and_blocked_split() {
    let (_dir, mut c) = config(&["A", "B", "C", "D"], 120);
    c.keep_labels = vec!["A".into(), "D".into()];
    c.split = SplitMode::BlockedTime;
    c.models = vec![ModelKind::ZeroR, ModelKind::RepTree];
    let r = run_pipeline(&c).unwrap();
    assert_eq!(r.data.class_distribution.keys().collect::<Vec<_>>(), ["A", "D"]);
    assert_eq!(r.results[0].metrics.confusion.classes, ["A", "D"]);
    assert_eq!(r.results[0].plan.split_mode, SplitMode::BlockedTime);
}

#[test]
fn artifacts_are_written() {
    let (dir, mut c) = config(&["A", "D"], 80);
    c.models = vec![ModelKind::ZeroR, ModelKind::NaiveBayes];
    c.report = Some(dir.path().join("report.json"));
    c.model_dir = Some(dir.path().join("models"));
    let r = run_pipeline(&c).unwrap();
    let saved: RunReport = read_json(c.report.as_ref().unwrap()).unwrap();
    assert_eq!(saved, r);
    let nb: ModelBundle = read_json(&dir.path().join("models/nb.json")).unwrap();
    assert_eq!(nb.model.n_features, 45);
    assert_eq!(nb.model.classes, ["A", "D"]);
}

#[test]
fn error_classification() {
    let (_dir, mut c) = config(&["A", "D"], 40);
    c.keep_labels = vec!["Z".into()];
    let e = run_pipeline(&c).unwrap_err();
    assert!(e.to_string().starts_with("ingest:"), "{e}");
    assert_eq!(e.kind(), ErrorKind::Data);

    let (_dir, mut c) = config(&["A", "D"], 40);
    c.window = 500;
    let e = run_pipeline(&c).unwrap_err();
    assert!(e.to_string().starts_with("preprocess:"), "{e}");

    let (_dir, mut c) = config(&["A", "D"], 40);
    c.stride = 0;
    assert_eq!(run_pipeline(&c).unwrap_err().kind(), ErrorKind::Usage);

    let (_dir, mut c) = config(&["A", "D"], 40);
    c.features = FeatureMode::List(vec!["Steering_wheel_angle".into()]);
    assert!(run_pipeline(&c).unwrap_err().to_string().contains("Steering_wheel_angle"));
}
