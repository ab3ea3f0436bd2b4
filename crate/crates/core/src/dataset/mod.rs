//! Delimited classification data: manifests, loading, splitting and
//! preparation.
//!
//! The pipeline is load → split → fit preprocessing on the training rows →
//! transform both splits. Imputation (mean for numeric, mode for
//! categorical) and min-max scaling use training statistics only; test
//! values outside the training range are clamped to [0, 1].

mod load;
mod manifest;
mod prepare;
mod split;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use load::{load, load_file, parse_table, RawRow, RawTable};
pub use manifest::{DatasetManifest, Delimiter, SplitSpec};
pub use prepare::{level_cmp, min_max, ColumnStats, Preprocessor};
pub use split::{split_counts, SplitIndices, MAX_SPLIT_ATTEMPTS};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} columns, found {got}")]
    Ragged {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: missing class label")]
    MissingLabel { line: usize },
    #[error("line {line}: column {column} has level {level:?} not seen in training")]
    UnknownLevel {
        column: usize,
        level: String,
        line: usize,
    },
    #[error("column {column} has no values in the training split")]
    AllMissing { column: usize },
    #[error("split: {0}")]
    Split(String),
}

/// Prepared feature matrix with integer class ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    /// Indices into `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// Source attributes used, before one-hot expansion.
    pub n_attributes: usize,
}

impl Dataset {
    pub fn new(
        name: &str,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Self {
        let n_attributes = features.first().map_or(0, Vec::len);
        Self {
            name: name.to_string(),
            features,
            labels,
            class_names,
            n_attributes,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }
}

/// A prepared train/test pair with the fitted statistics and split record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub preprocessor: Preprocessor,
    /// Present for count splits.
    pub split: Option<SplitIndices>,
}

fn label_cells(table: &RawTable, column: usize) -> Result<Vec<&str>, DataError> {
    table
        .rows
        .iter()
        .map(|r| {
            r.cells[column]
                .as_deref()
                .ok_or(DataError::MissingLabel { line: r.line })
        })
        .collect()
}

/// Fits on `train`, transforms both tables.
pub fn prepare(
    train: &RawTable,
    test: &RawTable,
    manifest: &DatasetManifest,
) -> Result<(Dataset, Dataset, Preprocessor), DataError> {
    let test_labels = label_cells(test, manifest.label_column)?;
    let p = Preprocessor::fit(train, manifest, &test_labels)?;
    let a = p.transform(train, &manifest.name)?;
    let b = p.transform(test, &manifest.name)?;
    Ok((a, b, p))
}

/// Loads, splits and prepares the manifest's data. `seed_override`
/// replaces the manifest's `split_seed`.
pub fn load_split(
    manifest: &DatasetManifest,
    seed_override: Option<u64>,
) -> Result<PreparedSplit, DataError> {
    let seed = seed_override.unwrap_or(manifest.split_seed);
    let (train, test, split) = match &manifest.split {
        SplitSpec::Counts {
            train_count,
            test_count,
        } => {
            let table = load(manifest)?;
            let labels = label_cells(&table, manifest.label_column)?;
            let s = split_counts(&labels, *train_count, *test_count, seed)?;
            (table.subset(&s.train), table.subset(&s.test), Some(s))
        }
        SplitSpec::Files {
            train_file,
            test_file,
        } => {
            let a = load_file(&manifest.resolve(train_file), manifest)?;
            let b = load_file(&manifest.resolve(test_file), manifest)?;
            if a.n_columns != b.n_columns {
                return Err(DataError::Manifest(format!(
                    "train file has {} columns, test file {}",
                    a.n_columns, b.n_columns
                )));
            }
            (a, b, None)
        }
    };
    let (train, test, preprocessor) = prepare(&train, &test, manifest)?;
    Ok(PreparedSplit {
        train,
        test,
        preprocessor,
        split,
    })
}

/// Reads a manifest file and prepares its data.
pub fn load_manifest_split(
    path: &Path,
    seed_override: Option<u64>,
) -> Result<PreparedSplit, DataError> {
    load_split(&DatasetManifest::from_file(path)?, seed_override)
}
