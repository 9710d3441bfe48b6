//! Delimited-text ingestion and emission.
//!
//! Rows are feature columns plus one label column (named, indexed, or the
//! last column by default). Classification labels map to dense 0-based
//! codes in first-appearance order; the original strings are kept on the
//! dataset. Synthetic datasets round-trip through the same format with a
//! sidecar file holding the per-row ground truth.

use std::path::Path;

use crate::error::{Error, Result};
use crate::knn::{LabelSet, ProbVector, TaskMode};
use crate::nn::PointSet;

use super::{GroundTruth, LabeledDataset};

/// Which column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name; requires `has_header`.
    Named(String),
    /// Zero-based column index.
    Index(usize),
    /// Rightmost column.
    Last,
}

/// Parse settings for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: LabelColumn,
    pub mode: TaskMode,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            delimiter: b',',
            has_header: true,
            label_column: LabelColumn::Last,
            mode: TaskMode::Classification,
        }
    }
}

/// Loads a delimited text file into a dataset.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .flexible(true)
        .from_path(path)?;

    let label_index = match &schema.label_column {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Last => None,
        LabelColumn::Named(name) => {
            if !schema.has_header {
                return Err(Error::InvalidArgument(
                    "named label column requires a header row".into(),
                ));
            }
            let headers = reader.headers().map_err(|e| Error::Parse {
                row: 0,
                message: format!("bad header: {e}"),
            })?;
            let pos = headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
                row: 0,
                message: format!("unknown label column '{name}'"),
            })?;
            Some(pos)
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 1;
        let record = record.map_err(|e| Error::Parse { row: row_no, message: e.to_string() })?;
        let cells = record.len();
        match width {
            None => {
                if cells < 2 {
                    return Err(Error::Parse {
                        row: row_no,
                        message: format!("need at least 2 columns, got {cells}"),
                    });
                }
                width = Some(cells);
            }
            Some(w) if w != cells => {
                return Err(Error::Parse {
                    row: row_no,
                    message: format!("ragged row: expected {w} columns, got {cells}"),
                })
            }
            Some(_) => {}
        }
        let label_pos = label_index.unwrap_or(cells - 1);
        if label_pos >= cells {
            return Err(Error::Parse {
                row: row_no,
                message: format!("label column {label_pos} out of range for {cells} columns"),
            });
        }
        let mut features = Vec::with_capacity(cells - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_pos {
                if cell.trim().is_empty() {
                    return Err(Error::Parse { row: row_no, message: "empty label cell".into() });
                }
                raw_labels.push(cell.trim().to_string());
            } else {
                let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row: row_no,
                    message: format!("non-numeric cell '{cell}' in column {col}"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        row: row_no,
                        message: format!("non-finite cell '{cell}' in column {col}"),
                    });
                }
                features.push(value);
            }
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(Error::Parse { row: 0, message: "no data rows".into() });
    }

    let points = PointSet::new(rows)?;
    match schema.mode {
        TaskMode::Classification => {
            let mut class_names: Vec<String> = Vec::new();
            let mut labels = Vec::with_capacity(raw_labels.len());
            for raw in &raw_labels {
                let code = match class_names.iter().position(|c| c == raw) {
                    Some(code) => code,
                    None => {
                        class_names.push(raw.clone());
                        class_names.len() - 1
                    }
                };
                labels.push(code);
            }
            let labels = LabelSet::classification(labels, class_names.len())?;
            Ok(LabeledDataset { points, labels, truth: None, class_names: Some(class_names) })
        }
        TaskMode::Regression => {
            let mut targets = Vec::with_capacity(raw_labels.len());
            for (idx, raw) in raw_labels.iter().enumerate() {
                let value: f64 = raw.parse().map_err(|_| Error::Parse {
                    row: idx + 1,
                    message: format!("non-numeric regression target '{raw}'"),
                })?;
                targets.push(value);
            }
            let labels = LabelSet::regression(targets)?;
            Ok(LabeledDataset { points, labels, truth: None, class_names: None })
        }
    }
}

/// Writes a dataset as delimited text: feature columns `x0..x{D-1}`, label
/// column `label` (original class names when available).
pub fn save_csv(path: &Path, dataset: &LabeledDataset, delimiter: u8) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_path(path)?;
    let dim = dataset.dim();
    let mut header: Vec<String> = (0..dim).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(io_from_csv)?;
    for (i, row) in dataset.points.iter().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        let label = match &dataset.labels {
            LabelSet::Classification { labels, .. } => match &dataset.class_names {
                Some(names) => names[labels[i]].clone(),
                None => labels[i].to_string(),
            },
            LabelSet::Regression { targets } => format_float(targets[i]),
        };
        record.push(label);
        writer.write_record(&record).map_err(io_from_csv)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the sidecar ground-truth file next to a saved dataset:
/// `eta_0..eta_{L-1}, bayes` per row for classification, `mean, sigma` for
/// regression.
pub fn save_truth_sidecar(path: &Path, dataset: &LabeledDataset, delimiter: u8) -> Result<()> {
    let truth = dataset
        .truth
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("dataset carries no ground truth".into()))?;
    let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_path(path)?;
    match truth {
        GroundTruth::Classification { eta, bayes_labels } => {
            let classes = eta[0].len();
            let mut header: Vec<String> = (0..classes).map(|l| format!("eta_{l}")).collect();
            header.push("bayes".into());
            writer.write_record(&header).map_err(io_from_csv)?;
            for (p, b) in eta.iter().zip(bayes_labels) {
                let mut record: Vec<String> = p.entries().iter().map(|v| format_float(*v)).collect();
                record.push(b.to_string());
                writer.write_record(&record).map_err(io_from_csv)?;
            }
        }
        GroundTruth::Regression { mean, noise_sigma } => {
            writer.write_record(["mean", "sigma"]).map_err(io_from_csv)?;
            for m in mean {
                writer
                    .write_record([format_float(*m), format_float(*noise_sigma)])
                    .map_err(io_from_csv)?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a sidecar written by [`save_truth_sidecar`] back onto a dataset.
pub fn load_truth_sidecar(path: &Path, dataset: &mut LabeledDataset, delimiter: u8) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_path(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { row: 0, message: format!("bad header: {e}") })?
        .clone();
    let classification = headers.iter().next_back() == Some("bayes");
    if classification {
        let classes = headers.len() - 1;
        let mut eta = Vec::new();
        let mut bayes = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::Parse { row: idx + 1, message: e.to_string() })?;
            let mut entries = Vec::with_capacity(classes);
            for cell in record.iter().take(classes) {
                entries.push(parse_cell(cell, idx + 1)?);
            }
            eta.push(ProbVector::new(entries)?);
            bayes.push(parse_cell(record.get(classes).unwrap_or(""), idx + 1)? as usize);
        }
        if eta.len() != dataset.len() {
            return Err(Error::InvalidArgument(format!(
                "truth rows ({}) disagree with dataset rows ({})",
                eta.len(),
                dataset.len()
            )));
        }
        dataset.truth = Some(GroundTruth::Classification { eta, bayes_labels: bayes });
    } else {
        let mut mean = Vec::new();
        let mut sigma = 0.0;
        for (idx, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::Parse { row: idx + 1, message: e.to_string() })?;
            mean.push(parse_cell(record.get(0).unwrap_or(""), idx + 1)?);
            sigma = parse_cell(record.get(1).unwrap_or(""), idx + 1)?;
        }
        if mean.len() != dataset.len() {
            return Err(Error::InvalidArgument(format!(
                "truth rows ({}) disagree with dataset rows ({})",
                mean.len(),
                dataset.len()
            )));
        }
        dataset.truth = Some(GroundTruth::Regression { mean, noise_sigma: sigma });
    }
    Ok(())
}

fn parse_cell(cell: &str, row: usize) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Parse { row, message: format!("non-numeric cell '{cell}'") })
}

/// Shortest display form that round-trips f64.
fn format_float(v: f64) -> String {
    format!("{v}")
}

fn io_from_csv(err: csv::Error) -> Error {
    Error::Parse { row: 0, message: err.to_string() }
}
