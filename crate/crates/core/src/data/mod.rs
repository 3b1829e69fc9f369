//! Datasets, CSV ingestion, cross-validation splits and subsampling.

mod split;
mod synthetic;

pub use split::{holdout, leave_one_segment_out, subsample_factor, tscv_folds, Fold, SplitPlan};
pub use synthetic::{SyntheticSpec, synthesize};

use crate::{Error, Result};
use ndarray::Array2;
use std::io::Write;
use std::path::Path;

/// A feature matrix with integer class labels and optional segment ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    /// Per-sample segment id, non-decreasing.
    pub segments: Option<Vec<u64>>,
    /// Seconds per sample, when known.
    pub sample_period: Option<f64>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<usize>, segments: Option<Vec<u64>>) -> Result<Self> {
        let feature_names = (0..x.ncols()).map(|f| format!("f{f}")).collect();
        let d = Self {
            x,
            y,
            segments,
            sample_period: None,
            feature_names,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.nrows();
        if self.y.len() != n {
            return Err(Error::ShapeMismatch(format!("{} labels for {n} rows", self.y.len())));
        }
        if self.feature_names.len() != self.x.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature names for {} columns",
                self.feature_names.len(),
                self.x.ncols()
            )));
        }
        if let Some(s) = &self.segments {
            if s.len() != n {
                return Err(Error::ShapeMismatch(format!("{} segment ids for {n} rows", s.len())));
            }
            if let Some(i) = s.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "segment ids must be non-decreasing: row {} has {} after {}",
                    i + 1,
                    s[i + 1],
                    s[i]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.x.ncols()
    }

    /// `max(label) + 1`, or 0 for an empty dataset.
    pub fn class_count(&self) -> usize {
        self.y.iter().max().map_or(0, |&m| m + 1)
    }

    /// Distinct segment ids in order of appearance.
    pub fn segment_ids(&self) -> Option<Vec<u64>> {
        self.segments.as_ref().map(|s| {
            let mut ids = s.clone();
            ids.dedup();
            ids
        })
    }

    /// Rows `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select(ndarray::Axis(0), indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            segments: self.segments.as_ref().map(|s| indices.iter().map(|&i| s[i]).collect()),
            sample_period: self.sample_period,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Column names used when reading a dataset CSV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: String,
    pub segment_column: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: "label".into(),
            segment_column: None,
        }
    }
}

impl CsvSchema {
    pub fn with_segments(mut self, column: impl Into<String>) -> Self {
        self.segment_column = Some(column.into());
        self
    }
}

/// Reads a headed CSV. Every column other than the label and segment
/// columns is a numeric feature, in file order.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let err = |line: u64, column: &str, message: String| Error::Csv {
        path: shown.clone(),
        line,
        column: column.to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| err(0, "", e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(1, "", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(1, name, format!("column not found (header: {})", header.join(","))))
    };
    let label_col = find(&schema.label_column)?;
    let segment_col = schema.segment_column.as_deref().map(find).transpose()?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != label_col && Some(c) != segment_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(err(1, "", "no feature columns".into()));
    }

    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut segments = segment_col.map(|_| Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, "", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(err(
                line,
                "",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for &c in &feature_cols {
            let cell = record[c].trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| err(line, &header[c], format!("not a number: '{cell}'")))?;
            if !v.is_finite() {
                return Err(err(line, &header[c], format!("non-finite value '{cell}'")));
            }
            values.push(v);
        }
        let cell = record[label_col].trim();
        y.push(
            parse_integer(cell)
                .and_then(|v| usize::try_from(v).ok())
                .ok_or_else(|| err(line, &header[label_col], format!("not a class label: '{cell}'")))?,
        );
        if let (Some(c), Some(s)) = (segment_col, segments.as_mut()) {
            let cell = record[c].trim();
            s.push(
                parse_integer(cell)
                    .and_then(|v| u64::try_from(v).ok())
                    .ok_or_else(|| err(line, &header[c], format!("not a segment id: '{cell}'")))?,
            );
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyInput(format!("{shown}: no data rows")));
    }
    let x = Array2::from_shape_vec((y.len(), feature_cols.len()), values)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let d = Dataset {
        x,
        y,
        segments,
        sample_period: None,
        feature_names: feature_cols.iter().map(|&c| header[c].clone()).collect(),
    };
    d.validate().map_err(|e| err(0, "", e.to_string()))?;
    Ok(d)
}

/// Accepts `3` and also `3.0`, as written by float-only exporters.
fn parse_integer(cell: &str) -> Option<i128> {
    if let Ok(v) = cell.parse::<i128>() {
        return Some(v);
    }
    let f: f64 = cell.parse().ok()?;
    (f.is_finite() && f.fract() == 0.0).then_some(f as i128)
}

/// Writes features (15 significant digits), then `label`, then `segment`
/// when present.
pub fn write_csv<W: Write>(d: &Dataset, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    header.push("label");
    if d.segments.is_some() {
        header.push("segment");
    }
    out.write_record(&header).map_err(csv_io)?;
    let mut row = Vec::with_capacity(header.len());
    for (i, xs) in d.x.rows().into_iter().enumerate() {
        row.clear();
        row.extend(xs.iter().map(|v| format!("{v:.14e}")));
        row.push(d.y[i].to_string());
        if let Some(s) = &d.segments {
            row.push(s[i].to_string());
        }
        out.write_record(&row).map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(d, std::io::BufWriter::new(f))
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
