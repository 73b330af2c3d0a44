//! Min-max scaling fitted per column.

use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::matrix::FeatureMatrix;

/// Which rows the normalizer is fitted on during cross-validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitPolicy {
    #[default]
    Train,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    /// `(x - min) / (max - min)`, or `0.0` for a constant column. Values
    /// outside the fitted range are not clipped.
    pub fn scale(&self, x: f64) -> f64 {
        if self.max > self.min {
            (x - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<MinMax>,
}

impl NormalizationParams {
    pub fn fit(train: &FeatureMatrix) -> Result<Self, PreprocessError> {
        if train.is_empty() {
            return Err(PreprocessError::EmptyInput);
        }
        let mut columns =
            vec![MinMax { min: f64::INFINITY, max: f64::NEG_INFINITY }; train.n_cols()];
        for row in train.rows() {
            for (c, &x) in columns.iter_mut().zip(row) {
                c.min = c.min.min(x);
                c.max = c.max.max(x);
            }
        }
        Ok(Self { columns })
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, PreprocessError> {
        let mut out = m.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, m: &mut FeatureMatrix) -> Result<(), PreprocessError> {
        if m.n_cols() != self.columns.len() {
            return Err(PreprocessError::ColumnCountMismatch {
                expected: self.columns.len(),
                found: m.n_cols(),
            });
        }
        let d = self.columns.len();
        if d == 0 {
            return Ok(());
        }
        for row in m.values_mut().chunks_exact_mut(d) {
            for (x, c) in row.iter_mut().zip(&self.columns) {
                *x = c.scale(*x);
            }
        }
        Ok(())
    }

    pub fn scale_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.columns).map(|(&x, c)| c.scale(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let d = rows.first().map_or(0, Vec::len);
        let names = (0..d).map(|j| format!("c{j}")).collect();
        let labels = vec!["A".to_string(); rows.len()];
        FeatureMatrix::new(names, rows, labels).unwrap()
    }

    #[test]
    fn fit_examples() {
        let p = NormalizationParams::fit(&matrix(vec![vec![0.0], vec![5.0], vec![10.0]])).unwrap();
        assert_eq!(p.columns, vec![MinMax { min: 0.0, max: 10.0 }]);

        let p =
            NormalizationParams::fit(&matrix(vec![vec![1.0, 100.0], vec![3.0, 300.0]])).unwrap();
        assert_eq!(
            p.columns,
            vec![MinMax { min: 1.0, max: 3.0 }, MinMax { min: 100.0, max: 300.0 }]
        );

        let p = NormalizationParams::fit(&matrix(vec![vec![4.0, -2.0]])).unwrap();
        assert!(p.columns.iter().all(|c| c.min == c.max));

        let empty = FeatureMatrix::new(vec!["a".into()], vec![], vec![]).unwrap();
        assert_eq!(NormalizationParams::fit(&empty), Err(PreprocessError::EmptyInput));
    }

    #[test]
    fn apply_examples() {
        let c = MinMax { min: 0.0, max: 10.0 };
        assert_eq!(c.scale(5.0), 0.5);
        assert_eq!(c.scale(0.0), 0.0);
        assert_eq!(c.scale(20.0), 2.0);
        assert_eq!(c.scale(-10.0), -1.0);
        assert_eq!(MinMax { min: 3.0, max: 3.0 }.scale(3.0), 0.0);

        let p = NormalizationParams { columns: vec![c] };
        let two = matrix(vec![vec![1.0, 2.0]]);
        assert_eq!(
            p.apply(&two),
            Err(PreprocessError::ColumnCountMismatch { expected: 1, found: 2 })
        );
    }

    proptest! {
        #[test]
        fn training_columns_span_unit_interval(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..60)
        ) {
            let m = matrix(rows);
            let p = NormalizationParams::fit(&m).unwrap();
            let n = p.apply(&m).unwrap();
            for j in 0..m.n_cols() {
                let col = n.column(j);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if p.columns[j].min == p.columns[j].max {
                    prop_assert!(col.iter().all(|&x| x == 0.0));
                } else {
                    prop_assert!(lo.abs() <= 1e-12 && (hi - 1.0).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn strictly_monotone(lo in -1e3f64..1e3, span in 1e-3f64..1e3, a in 0f64..1.0, b in 0f64..1.0) {
            prop_assume!(a != b);
            let c = MinMax { min: lo, max: lo + span };
            let (x, y) = (lo + a * span, lo + b * span);
            prop_assume!(x != y);
            prop_assert_eq!(x < y, c.scale(x) < c.scale(y));
        }
    }
}
