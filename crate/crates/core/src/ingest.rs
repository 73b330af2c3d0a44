//! Loading delimited trip logs into a [`TripDataset`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("row {row}, column {column:?}: missing value")]
    MissingCell { row: usize, column: String },
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("label {0:?} not present in dataset")]
    UnknownLabel(String),
    #[error("at least one label must be kept")]
    NoLabelsKept,
    #[error("schema column {0:?} not found in header")]
    UnknownColumn(String),
    #[error("record has {found} channels, dataset dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One timestamped row of sensor channels with its driver label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub row_index: usize,
    pub channels: Vec<f64>,
    pub label: String,
}

/// Ordered collection of records sharing the same channel layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripDataset {
    column_names: Vec<String>,
    records: Vec<TelemetryRecord>,
    label_alphabet: BTreeSet<String>,
}

/// Which columns become channels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    /// Every column except the label and the excluded ones, in file order.
    #[default]
    Infer,
    /// Exactly these columns, in this order.
    Columns(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub label_column: String,
    /// Bookkeeping columns dropped under [`Schema::Infer`].
    pub exclude_columns: Vec<String>,
    pub schema: Schema,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            label_column: "Class".to_string(),
            exclude_columns: vec!["Time(s)".to_string(), "PathOrder".to_string()],
            schema: Schema::Infer,
        }
    }
}

impl TripDataset {
    pub fn new(
        column_names: Vec<String>,
        records: Vec<TelemetryRecord>,
    ) -> Result<Self, IngestError> {
        if records.is_empty() {
            return Err(IngestError::EmptyDataset);
        }
        let d = column_names.len();
        if let Some(bad) = records.iter().find(|r| r.channels.len() != d) {
            return Err(IngestError::DimensionMismatch { expected: d, found: bad.channels.len() });
        }
        let label_alphabet = records.iter().map(|r| r.label.clone()).collect();
        Ok(Self { column_names, records, label_alphabet })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn records(&self) -> &[TelemetryRecord] {
        &self.records
    }

    pub fn label_alphabet(&self) -> &BTreeSet<String> {
        &self.label_alphabet
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Values of one channel in record order.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.channels[index]).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.label.as_str())
    }

    /// Writes the dataset back out with the label as the last column.
    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.column_names.clone();
        header.push(label_column.to_string());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row: Vec<String> = r.channels.iter().map(|v| v.to_string()).collect();
            row.push(r.label.clone());
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn load_dataset<R: Read>(source: R, opts: &LoadOptions) -> Result<TripDataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| IngestError::MissingLabelColumn(opts.label_column.clone()))?;

    let channel_idx: Vec<usize> = match &opts.schema {
        Schema::Infer => (0..header.len())
            .filter(|&i| i != label_idx && !opts.exclude_columns.contains(&header[i]))
            .collect(),
        Schema::Columns(cols) => cols
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c)
                    .filter(|&i| i != label_idx)
                    .ok_or_else(|| IngestError::UnknownColumn(c.clone()))
            })
            .collect::<Result<_, _>>()?,
    };
    let column_names: Vec<String> = channel_idx.iter().map(|&i| header[i].clone()).collect();

    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // header is line 1, so data row i sits on line i + 2
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(IngestError::RaggedRow { row, expected: header.len(), found: rec.len() });
        }
        let mut channels = Vec::with_capacity(channel_idx.len());
        for &c in &channel_idx {
            let cell = &rec[c];
            if cell.is_empty() {
                return Err(IngestError::MissingCell { row, column: header[c].clone() });
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::NonNumericCell {
                row,
                column: header[c].clone(),
                value: cell.to_string(),
            })?;
            channels.push(v);
        }
        let raw_label = &rec[label_idx];
        if raw_label.is_empty() {
            return Err(IngestError::MissingCell { row, column: opts.label_column.clone() });
        }
        records.push(TelemetryRecord {
            row_index: records.len(),
            channels,
            label: raw_label.to_string(),
        });
    }
    TripDataset::new(column_names, records)
}

/// Keeps only records whose label is in `keep`, preserving order.
pub fn filter_labels(
    ds: &TripDataset,
    keep: &BTreeSet<String>,
) -> Result<TripDataset, IngestError> {
    if keep.is_empty() {
        return Err(IngestError::NoLabelsKept);
    }
    if let Some(missing) = keep.iter().find(|k| !ds.label_alphabet.contains(*k)) {
        return Err(IngestError::UnknownLabel(missing.clone()));
    }
    let records = ds.records.iter().filter(|r| keep.contains(&r.label)).cloned().collect();
    Ok(TripDataset { column_names: ds.column_names.clone(), records, label_alphabet: keep.clone() })
}

/// Share of records per class.
pub fn class_distribution(ds: &TripDataset) -> BTreeMap<String, f64> {
    proportions(ds.labels())
}

pub(crate) fn proportions<'a>(labels: impl Iterator<Item = &'a str>) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut n = 0usize;
    for l in labels {
        *counts.entry(l.to_string()).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<TripDataset, IngestError> {
        load_dataset(s.as_bytes(), &LoadOptions::default())
    }

    #[test]
    fn minimal_file() {
        let ds = load("speed,rpm,Class\n1,2,A\n3,4,D\n5,6,A\n").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dimension(), 2);
        assert_eq!(ds.column_names(), ["speed", "rpm"]);
        assert_eq!(ds.records()[1].channels, vec![3.0, 4.0]);
        assert_eq!(ds.label_alphabet().iter().collect::<Vec<_>>(), ["A", "D"]);
        assert_eq!(ds.records()[2].row_index, 2);
    }

    #[test]
    fn drops_bookkeeping_columns() {
        let ds = load("Time(s),a,Class,PathOrder\n1,2.5,A,1\n2,3.5,A,1\n").unwrap();
        assert_eq!(ds.column_names(), ["a"]);
    }

    #[test]
    fn explicit_schema_orders_columns() {
        let opts = LoadOptions {
            schema: Schema::Columns(vec!["b".into(), "a".into()]),
            ..LoadOptions::default()
        };
        let ds = load_dataset("a,b,c,Class\n1,2,3,A\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.records()[0].channels, vec![2.0, 1.0]);
        let opts = LoadOptions { schema: Schema::Columns(vec!["z".into()]), ..opts };
        assert!(matches!(
            load_dataset("a,Class\n1,A\n".as_bytes(), &opts),
            Err(IngestError::UnknownColumn(_))
        ));
    }

    #[test]
    fn error_paths() {
        assert!(matches!(load("a,b\n1,2\n"), Err(IngestError::MissingLabelColumn(_))));
        assert!(matches!(load("a,Class\n"), Err(IngestError::EmptyDataset)));
        assert!(matches!(
            load("a,b,Class\n1,2,A\n1,A\n"),
            Err(IngestError::RaggedRow { row: 3, expected: 3, found: 2 })
        ));
        match load("a,b,Class\n1,x,A\n") {
            Err(IngestError::NonNumericCell { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (2, "b"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load("a,Class\n,A\n"), Err(IngestError::MissingCell { .. })));
    }

    #[test]
    fn custom_label_and_delimiter() {
        let opts = LoadOptions {
            delimiter: b';',
            label_column: "driver".into(),
            ..LoadOptions::default()
        };
        let ds = load_dataset("x;driver\n1.5;B\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.records()[0].label, "B");
    }

    #[test]
    fn filter_keeps_order_and_alphabet() {
        let ds = load("a,Class\n1,A\n2,B\n3,D\n4,A\n").unwrap();
        let keep: BTreeSet<String> = ["A", "D"].iter().map(|s| s.to_string()).collect();
        let f = filter_labels(&ds, &keep).unwrap();
        assert_eq!(f.column(0), vec![1.0, 3.0, 4.0]);
        assert_eq!(f.label_alphabet(), &keep);

        let all = ds.label_alphabet().clone();
        assert_eq!(filter_labels(&ds, &all).unwrap(), ds);

        let z: BTreeSet<String> = ["Z".to_string()].into();
        assert!(matches!(filter_labels(&ds, &z), Err(IngestError::UnknownLabel(l)) if l == "Z"));
        assert!(matches!(filter_labels(&ds, &BTreeSet::new()), Err(IngestError::NoLabelsKept)));
    }

    #[test]
    fn distribution() {
        let ds = load("a,Class\n1,A\n1,A\n1,A\n1,D\n").unwrap();
        let d = class_distribution(&ds);
        assert_eq!(d["A"], 0.75);
        assert_eq!(d["D"], 0.25);
        let single = load("a,Class\n1,X\n2,X\n").unwrap();
        assert_eq!(class_distribution(&single)["X"], 1.0);
    }

    #[test]
    fn reserialize_is_lossless() {
        let src = "a,b,Class\n0.1,-3.25,A\n1e-7,12345.678,D\n";
        let ds = load(src).unwrap();
        let mut out = Vec::new();
        ds.write_csv(&mut out, "Class").unwrap();
        let again = load_dataset(out.as_slice(), &LoadOptions::default()).unwrap();
        assert_eq!(again, ds);
    }
}
