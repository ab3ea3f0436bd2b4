use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::load::RawTable;
use super::manifest::DatasetManifest;
use super::{DataError, Dataset};

/// Orders numeric-looking strings by value, then everything else by text.
pub fn level_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal).then(a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

/// Training-split statistics of one source column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnStats {
    Numeric {
        column: usize,
        mean: f64,
        min: f64,
        max: f64,
    },
    Categorical {
        column: usize,
        mode: String,
        /// Sorted levels seen in training; two or fewer encode ordinally.
        levels: Vec<String>,
    },
}

impl ColumnStats {
    pub fn column(&self) -> usize {
        match self {
            ColumnStats::Numeric { column, .. } | ColumnStats::Categorical { column, .. } => {
                *column
            }
        }
    }

    fn width(&self) -> usize {
        match self {
            ColumnStats::Numeric { .. } => 1,
            ColumnStats::Categorical { levels, .. } if levels.len() <= 2 => 1,
            ColumnStats::Categorical { levels, .. } => levels.len(),
        }
    }

    /// Appends the encoded, imputed and normalized value of `cell`.
    fn encode(&self, cell: Option<&str>, line: usize, out: &mut Vec<f64>) -> Result<(), DataError> {
        match self {
            ColumnStats::Numeric {
                column,
                mean,
                min,
                max,
            } => {
                let v = match cell {
                    None => *mean,
                    Some(s) => parse_number(s, *column, line)?,
                };
                out.push(min_max(v, *min, *max));
            }
            ColumnStats::Categorical {
                column,
                mode,
                levels,
            } => {
                let level = cell.unwrap_or(mode);
                let pos = levels.iter().position(|l| l == level).ok_or_else(|| {
                    DataError::UnknownLevel {
                        column: *column,
                        level: level.to_string(),
                        line,
                    }
                })?;
                if levels.len() <= 2 {
                    out.push(pos as f64);
                } else {
                    out.extend((0..levels.len()).map(|k| if k == pos { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok(())
    }
}

/// `(v − min) / (max − min)` clamped to [0, 1]; a constant column maps to 0.
pub fn min_max(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn parse_number(s: &str, column: usize, line: usize) -> Result<f64, DataError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::Parse {
            line,
            message: format!("column {column}: {s:?} is not a finite number"),
        }),
    }
}

/// Fitted preprocessing: class alphabet and per-column statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub label_column: usize,
    pub class_names: Vec<String>,
    pub columns: Vec<ColumnStats>,
}

impl Preprocessor {
    /// Fits on `train` only. `class_names` is the sorted label alphabet of
    /// `train` and `extra_labels` together.
    pub fn fit(
        train: &RawTable,
        manifest: &DatasetManifest,
        extra_labels: &[&str],
    ) -> Result<Self, DataError> {
        let label_column = manifest.label_column;
        let mut class_names: Vec<String> = Vec::new();
        for row in &train.rows {
            let label = row.cells[label_column]
                .as_deref()
                .ok_or(DataError::MissingLabel { line: row.line })?;
            if !class_names.iter().any(|c| c == label) {
                class_names.push(label.to_string());
            }
        }
        for &l in extra_labels {
            if !class_names.iter().any(|c| c == l) {
                class_names.push(l.to_string());
            }
        }
        class_names.sort_by(|a, b| level_cmp(a, b));

        let mut columns = Vec::new();
        for column in 0..train.n_columns {
            if column == label_column || manifest.is_ignored(column) {
                continue;
            }
            let present: Vec<(&str, usize)> = train
                .rows
                .iter()
                .filter_map(|r| r.cells[column].as_deref().map(|s| (s, r.line)))
                .collect();
            if present.is_empty() {
                return Err(DataError::AllMissing { column });
            }
            if manifest.is_categorical(column) {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for (s, _) in &present {
                    *counts.entry(s).or_default() += 1;
                }
                let mut levels: Vec<String> = counts.keys().map(|s| s.to_string()).collect();
                levels.sort_by(|a, b| level_cmp(a, b));
                let top = counts.values().copied().max().unwrap_or(0);
                // ties go to the first level in sorted order
                let mode = levels
                    .iter()
                    .find(|l| counts[l.as_str()] == top)
                    .cloned()
                    .unwrap_or_default();
                if levels.len() == 1 {
                    log::warn!(
                        "{}: column {column} has a single level; encoded as 0",
                        manifest.name
                    );
                }
                columns.push(ColumnStats::Categorical {
                    column,
                    mode,
                    levels,
                });
            } else {
                let mut values = Vec::with_capacity(present.len());
                for (s, line) in &present {
                    values.push(parse_number(s, column, *line)?);
                }
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                // mean imputation never moves min or max
                if max <= min {
                    log::warn!(
                        "{}: column {column} has zero variance in training; mapped to 0",
                        manifest.name
                    );
                }
                columns.push(ColumnStats::Numeric {
                    column,
                    mean,
                    min,
                    max,
                });
            }
        }
        Ok(Self {
            label_column,
            class_names,
            columns,
        })
    }

    pub fn n_features(&self) -> usize {
        self.columns.iter().map(ColumnStats::width).sum()
    }

    pub fn transform(&self, table: &RawTable, name: &str) -> Result<Dataset, DataError> {
        let mut features = Vec::with_capacity(table.len());
        let mut labels = Vec::with_capacity(table.len());
        for row in &table.rows {
            let label = row.cells[self.label_column]
                .as_deref()
                .ok_or(DataError::MissingLabel { line: row.line })?;
            let class = self
                .class_names
                .iter()
                .position(|c| c == label)
                .ok_or_else(|| DataError::UnknownLevel {
                    column: self.label_column,
                    level: label.to_string(),
                    line: row.line,
                })?;
            let mut x = Vec::with_capacity(self.n_features());
            for stats in &self.columns {
                stats.encode(row.cells[stats.column()].as_deref(), row.line, &mut x)?;
            }
            features.push(x);
            labels.push(class);
        }
        let mut d = Dataset::new(name, features, labels, self.class_names.clone());
        d.n_attributes = self.columns.len();
        Ok(d)
    }
}
