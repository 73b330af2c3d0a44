//! Overlapping sliding-window summary statistics.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean, median_in_place, population_std};
use super::PreprocessError;
use crate::ingest::TripDataset;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Median,
    Std,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
            Statistic::Std => "std",
        }
    }

    /// Parses a comma-separated list such as `mean,median,std`.
    pub fn parse_list(s: &str) -> Result<Vec<Statistic>, PreprocessError> {
        s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
    }
}

impl FromStr for Statistic {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Statistic::Mean),
            "median" => Ok(Statistic::Median),
            "std" => Ok(Statistic::Std),
            other => Err(PreprocessError::UnknownStatistic(other.to_string())),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Window length and stride in samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub stride: usize,
    pub statistics: Vec<Statistic>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            length: 60,
            stride: 1,
            statistics: vec![Statistic::Mean, Statistic::Median, Statistic::Std],
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.length < 2 {
            return Err(PreprocessError::InvalidWindow("length must be at least 2".into()));
        }
        if self.stride == 0 || self.stride > self.length {
            return Err(PreprocessError::InvalidWindow(format!(
                "stride must be in 1..={}, got {}",
                self.length, self.stride
            )));
        }
        if self.statistics.is_empty() {
            return Err(PreprocessError::InvalidWindow("no statistics requested".into()));
        }
        Ok(())
    }
}

/// Number of window positions over a uniform series of `n` samples.
pub fn window_count(n: usize, length: usize, stride: usize) -> usize {
    if n < length {
        0
    } else {
        (n - length) / stride + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedMatrix {
    pub matrix: FeatureMatrix,
    /// Record index each emitted window starts at.
    pub starts: Vec<usize>,
    /// Windows skipped because they straddle a label change.
    pub dropped_mixed_label: usize,
}

pub fn extract_windows(
    ds: &TripDataset,
    kept: &[String],
    spec: &WindowSpec,
) -> Result<WindowedMatrix, PreprocessError> {
    spec.validate()?;
    let cols: Vec<usize> = kept
        .iter()
        .map(|k| ds.column_index(k).ok_or_else(|| PreprocessError::UnknownFeatureName(k.clone())))
        .collect::<Result<_, _>>()?;
    let n = ds.len();
    if spec.length > n {
        return Err(PreprocessError::WindowLongerThanSeries { length: spec.length, series: n });
    }
    let records = ds.records();

    // run_end[i]: last index of the same-label run containing i
    let mut run_end = vec![0usize; n];
    for i in (0..n).rev() {
        run_end[i] =
            if i + 1 < n && records[i + 1].label == records[i].label { run_end[i + 1] } else { i };
    }

    let all_starts: Vec<usize> = (0..=n - spec.length).step_by(spec.stride).collect();
    let starts: Vec<usize> =
        all_starts.iter().copied().filter(|&s| run_end[s] >= s + spec.length - 1).collect();
    let dropped = all_starts.len() - starts.len();

    let width = cols.len() * spec.statistics.len();
    let rows: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&s| {
            let mut out = Vec::with_capacity(width);
            let mut buf = vec![0.0; spec.length];
            for &c in &cols {
                for (b, r) in buf.iter_mut().zip(&records[s..s + spec.length]) {
                    *b = r.channels[c];
                }
                for stat in &spec.statistics {
                    out.push(match stat {
                        Statistic::Mean => mean(&buf),
                        Statistic::Std => population_std(&buf),
                        Statistic::Median => median_in_place(&mut buf.clone()),
                    });
                }
            }
            out
        })
        .collect();

    let names =
        kept.iter().flat_map(|k| spec.statistics.iter().map(move |s| format!("{k}_{s}"))).collect();
    let labels = starts.iter().map(|&s| records[s].label.clone()).collect();
    let matrix = FeatureMatrix::new(names, rows, labels).expect("window rows are rectangular");
    Ok(WindowedMatrix { matrix, starts, dropped_mixed_label: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TelemetryRecord;

    fn series(values: &[f64], labels: &[&str]) -> TripDataset {
        let records = values
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (&v, &l))| TelemetryRecord {
                row_index: i,
                channels: vec![v],
                label: l.to_string(),
            })
            .collect();
        TripDataset::new(vec!["x".into()], records).unwrap()
    }

    fn spec(length: usize, stride: usize) -> WindowSpec {
        WindowSpec { length, stride, ..WindowSpec::default() }
    }

    #[test]
    fn single_full_window() {
        let ds = series(&[1.0, 2.0, 3.0, 4.0, 5.0], &["A"; 5]);
        let w = extract_windows(&ds, &["x".into()], &spec(5, 1)).unwrap();
        assert_eq!(w.matrix.column_names(), ["x_mean", "x_median", "x_std"]);
        assert_eq!(w.matrix.n_rows(), 1);
        let row = w.matrix.row(0);
        assert_eq!(row[0], 3.0);
        assert_eq!(row[1], 3.0);
        assert!((row[2] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn strided_positions() {
        let ds = series(&[0.0; 10], &["A"; 10]);
        let w = extract_windows(&ds, &["x".into()], &spec(4, 2)).unwrap();
        assert_eq!(w.starts, vec![0, 2, 4, 6]);
        assert_eq!(w.dropped_mixed_label, 0);
    }

    #[test]
    fn mixed_label_windows_dropped() {
        let ds = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &["A", "A", "A", "D", "D", "D"]);
        let w = extract_windows(&ds, &["x".into()], &spec(2, 1)).unwrap();
        assert_eq!(w.starts, vec![0, 1, 3, 4]);
        assert_eq!(w.dropped_mixed_label, 1);
        assert_eq!(w.matrix.labels(), ["A", "A", "D", "D"]);
        // even window length: median averages the middle pair
        assert_eq!(w.matrix.row(0)[1], 1.5);
    }

    #[test]
    fn errors() {
        let ds = series(&[1.0, 2.0, 3.0], &["A"; 3]);
        assert_eq!(
            extract_windows(&ds, &["x".into()], &spec(4, 1)).unwrap_err(),
            PreprocessError::WindowLongerThanSeries { length: 4, series: 3 }
        );
        assert!(matches!(
            extract_windows(&ds, &["y".into()], &spec(2, 1)),
            Err(PreprocessError::UnknownFeatureName(_))
        ));
        for bad in [spec(1, 1), spec(3, 0), spec(3, 4)] {
            assert!(matches!(bad.validate(), Err(PreprocessError::InvalidWindow(_))));
        }
    }

    #[test]
    fn statistic_parsing() {
        assert_eq!(
            Statistic::parse_list("mean, std").unwrap(),
            vec![Statistic::Mean, Statistic::Std]
        );
        assert!(Statistic::parse_list("mean,mode").is_err());
    }
}
