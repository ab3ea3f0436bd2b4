use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Comma,
    Whitespace,
}

/// How the rows become a train/test pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SplitSpec {
    /// Seeded shuffle of the single data file into two counts.
    Counts {
        train_count: usize,
        test_count: usize,
    },
    /// Separate files, used as given.
    Files {
        train_file: PathBuf,
        test_file: PathBuf,
    },
}

/// Declarative description of a delimited classification file.
///
/// ```toml
/// name = "hepatitis"
/// path = "hepatitis.data"
/// label_column = 0
/// categorical = [2, 3]
///
/// [split]
/// kind = "counts"
/// train_count = 100
/// test_count = 55
/// ```
///
/// Relative paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    /// Data file; required for count splits.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub delimiter: Delimiter,
    #[serde(default = "default_missing")]
    pub missing_marker: String,
    /// Zero-based index of the class column.
    pub label_column: usize,
    /// Zero-based indices of categorical columns; all others are numeric.
    #[serde(default)]
    pub categorical: Vec<usize>,
    /// Zero-based indices of columns dropped before preparation.
    #[serde(default)]
    pub ignore: Vec<usize>,
    /// Skip ARFF `@…` header lines and `%` comments.
    #[serde(default)]
    pub arff: bool,
    /// Skip the first non-empty line.
    #[serde(default)]
    pub header: bool,
    /// Seed of the split shuffle.
    #[serde(default)]
    pub split_seed: u64,
    pub split: SplitSpec,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_missing() -> String {
    "?".to_string()
}

impl DatasetManifest {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, DataError> {
        let mut m: Self =
            toml::from_str(text).map_err(|e| DataError::Manifest(e.message().to_string()))?;
        m.base_dir = base_dir.to_path_buf();
        m.check()?;
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, dir).map_err(|e| match e {
            DataError::Manifest(msg) => DataError::Manifest(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn is_categorical(&self, column: usize) -> bool {
        self.categorical.contains(&column)
    }

    pub fn is_ignored(&self, column: usize) -> bool {
        self.ignore.contains(&column)
    }

    fn check(&self) -> Result<(), DataError> {
        if self.missing_marker.is_empty() {
            return Err(DataError::Manifest(
                "missing_marker must not be empty".into(),
            ));
        }
        if self.is_ignored(self.label_column) || self.is_categorical(self.label_column) {
            return Err(DataError::Manifest(
                "label_column must not be listed as ignored or categorical".into(),
            ));
        }
        match &self.split {
            SplitSpec::Counts {
                train_count,
                test_count,
            } => {
                if self.path.is_none() {
                    return Err(DataError::Manifest("count split needs `path`".into()));
                }
                if *train_count == 0 || *test_count == 0 {
                    return Err(DataError::Manifest("split counts must be positive".into()));
                }
            }
            SplitSpec::Files { .. } => {}
        }
        Ok(())
    }
}
