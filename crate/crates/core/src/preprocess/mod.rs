//! Turning a [`TripDataset`](crate::ingest::TripDataset) into a model-ready
//! [`FeatureMatrix`](crate::matrix::FeatureMatrix).

pub mod normalize;
pub mod selection;
pub mod stats;
pub mod window;

use thiserror::Error;

pub use normalize::{FitPolicy, MinMax, NormalizationParams};
pub use selection::{
    reference_features, select_features, FeatureAlias, FeatureSelectionReport, SelectionMode,
    SelectionParams,
};
pub use window::{extract_windows, window_count, Statistic, WindowSpec, WindowedMatrix};

use crate::ingest::TripDataset;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("input has no rows")]
    EmptyInput,
    #[error("feature {0:?} not found in dataset")]
    UnknownFeatureName(String),
    #[error("normalizer fitted on {expected} columns, matrix has {found}")]
    ColumnCountMismatch { expected: usize, found: usize },
    #[error("window of {length} samples is longer than the {series}-sample series")]
    WindowLongerThanSeries { length: usize, series: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("unknown statistic {0:?} (expected mean, median or std)")]
    UnknownStatistic(String),
}

/// Population mean and standard deviation of a named channel.
pub fn column_stats(ds: &TripDataset, column: &str) -> Result<(f64, f64), PreprocessError> {
    let j = ds
        .column_index(column)
        .ok_or_else(|| PreprocessError::UnknownFeatureName(column.to_string()))?;
    let values = ds.column(j);
    if values.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    Ok((stats::mean(&values), stats::population_std(&values)))
}
