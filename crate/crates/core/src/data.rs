//! Tabular regression data: loading, validation, standardization and
//! reproducible train/validation splits.
//!
//! A [`Dataset`] is column oriented: `features[j][i]` is the value of feature
//! `j` on row `i`. Every value is finite and every column has the same length.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Vec<Vec<f64>>,
    target_name: String,
    target: Vec<f64>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        target_name: impl Into<String>,
        target: Vec<f64>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        if feature_names.len() != features.len() {
            return Err(Error::InvalidData(format!(
                "{} feature names for {} feature columns",
                feature_names.len(),
                features.len()
            )));
        }
        if target.is_empty() {
            return Err(Error::InvalidData("no rows".into()));
        }
        let mut seen = HashSet::new();
        for name in feature_names.iter().chain(std::iter::once(&target_name)) {
            if name.trim().is_empty() {
                return Err(Error::InvalidData("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!(
                    "duplicate column name {name:?}"
                )));
            }
        }
        for (name, col) in feature_names.iter().zip(&features) {
            if col.len() != target.len() {
                return Err(Error::InvalidData(format!(
                    "column {name:?} has {} rows, target has {}",
                    col.len(),
                    target.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value in column {name:?} at row {i}"
                )));
            }
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite target value at row {i}"
            )));
        }
        Ok(Dataset {
            feature_names,
            features,
            target_name,
            target,
        })
    }

    /// Builds a dataset from row-major points, naming features `x1..xn`.
    pub fn from_rows(rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.len() != target.len() {
            return Err(Error::InvalidData(format!(
                "{} rows but {} targets",
                rows.len(),
                target.len()
            )));
        }
        let mut features = vec![Vec::with_capacity(rows.len()); n];
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (col, &v) in features.iter_mut().zip(row) {
                col.push(v);
            }
        }
        let names = (1..=n).map(|j| format!("x{j}")).collect();
        Dataset::new(names, features, "y", target)
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn feature(&self, j: usize) -> &[f64] {
        &self.features[j]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n_rows()).map(|i| self.row(i))
    }

    /// Minimum and maximum of each feature column.
    pub fn ranges(&self) -> Vec<(f64, f64)> {
        self.features
            .iter()
            .map(|c| {
                c.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect()
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let features = self
            .features
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        let target = rows.iter().map(|&i| self.target[i]).collect();
        Dataset::new(
            self.feature_names.clone(),
            features,
            self.target_name.clone(),
            target,
        )
    }

    pub fn with_target(&self, target: Vec<f64>) -> Result<Self> {
        Dataset::new(
            self.feature_names.clone(),
            self.features.clone(),
            self.target_name.clone(),
            target,
        )
    }
}

/// Header plus columns of a numeric CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Removes the named column and returns it, if present.
    pub fn take_column(&mut self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.header.remove(idx);
        Some(self.columns.remove(idx))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|i| self.columns.iter().map(|c| c[i]).collect())
            .collect()
    }
}

/// Reads a numeric CSV file. Row numbers in errors are file line numbers
/// (the header is line 1).
pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text)
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Csv("missing header row".into()));
    }
    let mut seen = HashSet::new();
    for h in &header {
        if h.is_empty() {
            return Err(Error::Csv("empty column name in header".into()));
        }
        if !seen.insert(h.as_str()) {
            return Err(Error::Csv(format!("duplicate header column {h:?}")));
        }
    }
    let mut columns = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Csv(format!(
                "row {row}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        for ((cell, name), col) in record.iter().zip(&header).zip(&mut columns) {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: name.clone(),
                value: cell.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    value: cell.to_owned(),
                });
            }
            col.push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::InvalidData("empty data section".into()));
    }
    Ok(Table { header, columns })
}

/// Loads a dataset; `target_column` becomes the target and all remaining
/// columns become features in header order.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
    let table = read_table(path)?;
    dataset_from_table(table, target_column)
}

pub fn dataset_from_table(mut table: Table, target_column: &str) -> Result<Dataset> {
    let target = table.take_column(target_column).ok_or_else(|| {
        Error::InvalidData(format!("target column {target_column:?} not in header"))
    })?;
    Dataset::new(table.header, table.columns, target_column, target)
}

/// Formats a value with 17 significant digits, enough to round-trip any f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(d: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<&str> = d
        .feature_names
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(d.target_name.as_str()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..d.n_rows() {
        let cells: Vec<String> = d
            .features
            .iter()
            .map(|c| format_value(c[i]))
            .chain(std::iter::once(format_value(d.target[i])))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `d` with the target as the last column.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), to_csv_string(d).as_bytes())
}

/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a truncated file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    /// Population standard deviation (divisor N); 1.0 for constant columns.
    pub std_dev: f64,
    /// False for constant columns, which pass through unchanged.
    pub scaled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub columns: Vec<ColumnScaling>,
}

impl ScalingParams {
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        self.map(d, |s, v| (v - s.mean) / s.std_dev)
    }

    pub fn invert(&self, d: &Dataset) -> Result<Dataset> {
        self.map(d, |s, v| v * s.std_dev + s.mean)
    }

    fn map(&self, d: &Dataset, f: impl Fn(&ColumnScaling, f64) -> f64) -> Result<Dataset> {
        if self.columns.len() != d.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                actual: d.n_features(),
            });
        }
        let features = d
            .features
            .iter()
            .zip(&self.columns)
            .map(|(col, s)| {
                if s.scaled {
                    col.iter().map(|&v| f(s, v)).collect()
                } else {
                    col.clone()
                }
            })
            .collect();
        Dataset::new(
            d.feature_names.clone(),
            features,
            d.target_name.clone(),
            d.target.clone(),
        )
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Centers and scales every non-constant feature to mean 0 and population
/// standard deviation 1. The target is untouched.
pub fn standardize(d: &Dataset) -> (Dataset, ScalingParams) {
    let columns = d
        .features
        .iter()
        .map(|col| {
            let m = mean(col);
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64;
            let sd = var.sqrt();
            let scale = col.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
            if sd <= 1e-12 * scale {
                ColumnScaling {
                    mean: m,
                    std_dev: 1.0,
                    scaled: false,
                }
            } else {
                ColumnScaling {
                    mean: m,
                    std_dev: sd,
                    scaled: true,
                }
            }
        })
        .collect();
    let params = ScalingParams { columns };
    let scaled = params
        .apply(d)
        .expect("scaling derived from the same dataset");
    (scaled, params)
}

/// 64-bit linear congruential generator (Knuth's MMIX constants) used for
/// reproducible row shuffling:
/// `state <- state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform in [0, 1) from the top 53 bits of the next state.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..=bound`.
    fn index_upto(&mut self, bound: usize) -> usize {
        ((self.next_f64() * (bound + 1) as f64) as usize).min(bound)
    }

    /// Fisher-Yates shuffle, walking from the last position down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index_upto(i);
            items.swap(i, j);
        }
    }
}

/// Splits rows into (train, validation). The train size is
/// `floor(train_fraction * N)`, capped so at least one validation row remains.
/// Rows keep their original relative order inside each part.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = d.n_rows();
    let n_train = ((train_fraction * n as f64).floor() as usize).min(n.saturating_sub(1));
    if n_train < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            actual: n_train,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    Lcg::new(seed).shuffle(&mut order);
    let (train, valid) = order.split_at_mut(n_train);
    train.sort_unstable();
    valid.sort_unstable();
    Ok((d.subset(train)?, d.subset(valid)?))
}

/// The bundled example: three uniform inputs on [0, 1] with
/// `y = 1 + 2 x1 + sin(2 pi x2) + 4 x1 x3 + noise`, noise uniform in
/// [-0.05, 0.05]. Additive in `x1`, `x2` plus one `x1 x3` interaction.
pub fn synthetic_additive_interaction(rows: usize, seed: u64) -> Dataset {
    let mut rng = Lcg::new(seed);
    let mut features: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(rows)).collect();
    let mut target = Vec::with_capacity(rows);
    for _ in 0..rows {
        let x: Vec<f64> = (0..3).map(|_| rng.next_f64()).collect();
        let noise = 0.1 * (rng.next_f64() - 0.5);
        let y = 1.0
            + 2.0 * x[0]
            + (2.0 * std::f64::consts::PI * x[1]).sin()
            + 4.0 * x[0] * x[2]
            + noise;
        for (col, v) in features.iter_mut().zip(&x) {
            // Round to 6 decimals so the committed CSV stays readable.
            col.push((v * 1e6).round() / 1e6);
        }
        target.push((y * 1e6).round() / 1e6);
    }
    Dataset::new(
        vec!["x1".into(), "x2".into(), "x3".into()],
        features,
        "y",
        target,
    )
    .expect("generated values are finite")
}
