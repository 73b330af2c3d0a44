//! Dense labelled design matrix shared by preprocessing, models and evaluation.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{self, IngestError, LoadOptions, Schema};

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },
}

/// Row-major matrix of features with one class label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    column_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
    ) -> Result<Self, MatrixError> {
        let d = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(MatrixError::RaggedRow { row: i, expected: d, found: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(column_names, values, labels)
    }

    pub fn from_flat(
        column_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<String>,
    ) -> Result<Self, MatrixError> {
        let d = column_names.len();
        let rows = values.len().checked_div(d).unwrap_or(labels.len());
        if d > 0 && !values.len().is_multiple_of(d) {
            return Err(MatrixError::RaggedRow { row: rows, expected: d, found: values.len() % d });
        }
        if rows != labels.len() {
            return Err(MatrixError::LabelCountMismatch { rows, labels: labels.len() });
        }
        Ok(Self { column_names, values, labels })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        self.labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let d = self.n_cols();
        let mut values = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i].clone());
        }
        FeatureMatrix { column_names: self.column_names.clone(), values, labels }
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`].
    pub fn read_csv<R: Read>(source: R, label_column: &str) -> Result<Self, IngestError> {
        let opts = LoadOptions {
            label_column: label_column.to_string(),
            exclude_columns: Vec::new(),
            schema: Schema::Infer,
            ..LoadOptions::default()
        };
        let ds = ingest::load_dataset(source, &opts)?;
        let d = ds.dimension();
        let mut values = Vec::with_capacity(ds.len() * d);
        let mut labels = Vec::with_capacity(ds.len());
        for r in ds.records() {
            values.extend_from_slice(&r.channels);
            labels.push(r.label.clone());
        }
        Ok(FeatureMatrix { column_names: ds.column_names().to_vec(), values, labels })
    }

    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.column_names.clone();
        header.push(label_column.to_string());
        w.write_record(&header)?;
        let mut buf: Vec<String> = Vec::with_capacity(self.n_cols() + 1);
        for (row, label) in self.rows().zip(&self.labels) {
            buf.clear();
            buf.extend(row.iter().map(|v| v.to_string()));
            buf.push(label.clone());
            w.write_record(&buf)?;
        }
        w.flush()?;
        Ok(())
    }
}
