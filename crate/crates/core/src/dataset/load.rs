use std::path::Path;

use super::manifest::{DatasetManifest, Delimiter};
use super::DataError;

/// One parsed data line; `None` marks a missing cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    /// 1-based line number in the source file.
    pub line: usize,
    pub cells: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    pub n_columns: usize,
    pub rows: Vec<RawRow>,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> RawTable {
        RawTable {
            n_columns: self.n_columns,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Reads `path` under the manifest's parsing rules.
pub fn load_file(path: &Path, manifest: &DatasetManifest) -> Result<RawTable, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(&text, manifest)
}

/// Loads the manifest's single data file.
pub fn load(manifest: &DatasetManifest) -> Result<RawTable, DataError> {
    let path = manifest
        .path
        .as_ref()
        .ok_or_else(|| DataError::Manifest("manifest has no `path`".into()))?;
    load_file(&manifest.resolve(path), manifest)
}

fn clean(cell: &str) -> &str {
    let t = cell.trim();
    let t = t
        .strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .unwrap_or(t);
    let t = t
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(t);
    t.trim()
}

pub fn parse_table(text: &str, manifest: &DatasetManifest) -> Result<RawTable, DataError> {
    let mut rows = Vec::new();
    let mut n_columns: Option<usize> = None;
    let mut header_pending = manifest.header;
    let mut in_arff_data = false;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if manifest.arff {
            if trimmed.starts_with('%') {
                continue;
            }
            if let Some(directive) = trimmed.strip_prefix('@') {
                if directive.to_ascii_lowercase().starts_with("data") {
                    in_arff_data = true;
                }
                continue;
            }
            if !in_arff_data {
                return Err(DataError::Parse {
                    line,
                    message: "data before the ARFF @data line".into(),
                });
            }
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut cells: Vec<&str> = match manifest.delimiter {
            Delimiter::Comma => trimmed.split(',').map(clean).collect(),
            Delimiter::Whitespace => trimmed.split_whitespace().collect(),
        };
        let expected = *n_columns.get_or_insert(cells.len());
        // stray trailing delimiters leave empty cells; drop them
        while cells.len() > expected && cells.last().is_some_and(|c| c.is_empty()) {
            cells.pop();
        }
        if cells.len() != expected {
            return Err(DataError::Ragged {
                line,
                expected,
                got: cells.len(),
            });
        }
        let cells = cells
            .into_iter()
            .map(|c| {
                if c.is_empty() || c == manifest.missing_marker {
                    None
                } else {
                    Some(c.to_string())
                }
            })
            .collect();
        rows.push(RawRow { line, cells });
    }
    let n_columns = n_columns.unwrap_or(0);
    if rows.is_empty() {
        return Err(DataError::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    if manifest.label_column >= n_columns {
        return Err(DataError::Manifest(format!(
            "label_column {} is out of range for {n_columns} columns",
            manifest.label_column
        )));
    }
    if let Some(&c) = manifest
        .categorical
        .iter()
        .chain(&manifest.ignore)
        .find(|&&c| c >= n_columns)
    {
        return Err(DataError::Manifest(format!(
            "column {c} is out of range for {n_columns} columns"
        )));
    }
    Ok(RawTable { n_columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::manifest::SplitSpec;

    fn manifest(delimiter: Delimiter, arff: bool) -> DatasetManifest {
        DatasetManifest {
            name: "t".into(),
            path: None,
            delimiter,
            missing_marker: "?".into(),
            label_column: 2,
            categorical: vec![],
            ignore: vec![],
            arff,
            header: false,
            split_seed: 0,
            split: SplitSpec::Counts {
                train_count: 1,
                test_count: 1,
            },
            base_dir: ".".into(),
        }
    }

    #[test]
    fn missing_marker_flags_cell() {
        let t = parse_table("1,?,3\n", &manifest(Delimiter::Comma, false)).unwrap();
        assert_eq!(
            t.rows[0].cells,
            vec![Some("1".into()), None, Some("3".into())]
        );
    }

    #[test]
    fn whitespace_rows_and_trailing_spaces() {
        let t = parse_table(
            "0.1 0 1  \n0.2 1 3\n",
            &manifest(Delimiter::Whitespace, false),
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.n_columns, 3);
        assert_eq!(t.rows[1].line, 2);
    }

    #[test]
    fn arff_header_is_skipped() {
        let text = "% comment\n@relation r\n@attribute 'a' numeric\n@attribute b {x,y}\n@attribute c {p,q}\n\n@data\n1,x,p\n2,'y' , q,\n";
        let t = parse_table(text, &manifest(Delimiter::Comma, true)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows[1].cells[1].as_deref(), Some("y"));
        assert_eq!(t.rows[1].cells[2].as_deref(), Some("q"));
        assert_eq!(t.rows[1].line, 9);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_table("1,2,3\n\n1,2\n", &manifest(Delimiter::Comma, false)).unwrap_err();
        match err {
            DataError::Ragged {
                line,
                expected,
                got,
            } => {
                assert_eq!((line, expected, got), (3, 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_table("1,2\n", &manifest(Delimiter::Comma, false)).is_err());
    }
}
