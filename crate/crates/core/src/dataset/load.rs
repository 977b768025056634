use std::fs::File;
use std::path::Path;

use super::{Dataset, FeatureSchema, KeyValueRecord};
use crate::error::{Error, Result};

/// Raw comma-separated rows with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub rows: Vec<Vec<String>>,
    pub lines: Vec<u64>,
}

impl RawTable {
    /// Reads a UCI-style file: no header, comma separated, fields trimmed,
    /// blank lines and `|` comment lines skipped. Every row must have
    /// `arity` fields.
    pub fn read(path: &Path, arity: usize) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'|'))
            .from_reader(file);
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let row = e.position().map_or(0, |p| p.line() as usize);
                Error::MalformedRow {
                    row,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            if rec.len() != arity {
                return Err(Error::Arity {
                    row: line as usize,
                    expected: arity,
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(str::to_string).collect());
            lines.push(line);
        }
        if rows.is_empty() {
            return Err(Error::EmptyFile(path.to_path_buf()));
        }
        Ok(Self { rows, lines })
    }

    /// Feature columns only (label column dropped).
    pub fn features(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect()
    }
}

/// Loader statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    /// Tokens that were not in their key's enumerated set and were mapped to
    /// the missing value.
    pub unknown_tokens: usize,
}

/// Parses a UCI CSV file (label in the last column) against `schema`.
pub fn load_uci_csv(path: &Path, schema: &FeatureSchema) -> Result<Dataset> {
    load_uci_csv_with_report(path, schema).map(|(d, _)| d)
}

pub fn load_uci_csv_with_report(path: &Path, schema: &FeatureSchema) -> Result<(Dataset, LoadReport)> {
    let k = schema.n_keys();
    let table = RawTable::read(path, k + 1)?;
    let mut report = LoadReport {
        rows: table.rows.len(),
        ..Default::default()
    };
    let mut records = Vec::with_capacity(table.rows.len());
    for (row, &line) in table.rows.iter().zip(&table.lines) {
        let line = line as usize;
        let mut values = Vec::with_capacity(k);
        for (key, tok) in schema.keys().iter().zip(row) {
            let id = key.value_id(tok).map_err(|e| Error::MalformedRow {
                row: line,
                message: e.to_string(),
            })?;
            values.push(match id {
                Some(v) => v,
                None => {
                    report.unknown_tokens += 1;
                    key.missing_id()
                }
            });
        }
        let label_tok = row[k].trim_end_matches('.');
        let label = schema.class_id(label_tok).ok_or_else(|| Error::MalformedRow {
            row: line,
            message: format!("unknown class label `{label_tok}`"),
        })?;
        records.push(KeyValueRecord { values, label });
    }
    Ok((Dataset::new(schema.clone(), records), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{KeySpec, MISSING};
    use std::io::Write;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                KeySpec::categorical("colour", ["red", "blue"]),
                KeySpec::numeric("age", vec![18.0, 65.0]),
            ],
            vec!["no".into(), "yes".into()],
        )
        .unwrap()
    }

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_and_counts_unknowns() {
        let f = write("|comment\nred, 17, no\n\nblue, 40, yes.\ngreen, ?, no\n");
        let (d, rep) = load_uci_csv_with_report(f.path(), &schema()).unwrap();
        assert_eq!(d.records.len(), 3);
        assert_eq!(d.records[0], KeyValueRecord::new(vec![0, 0], 0));
        assert_eq!(d.records[1], KeyValueRecord::new(vec![1, 1], 1));
        // green is unknown -> missing; "?" numeric -> numeric missing slot
        assert_eq!(d.records[2].values, vec![2, 3]);
        assert_eq!(rep.unknown_tokens, 1);
        assert_eq!(d.schema.keys()[0].value_id(MISSING).unwrap(), Some(2));
    }

    #[test]
    fn arity_mismatch_reports_row() {
        let f = write("red,17,no\nred,17\n");
        match load_uci_csv(f.path(), &schema()) {
            Err(Error::Arity { row, expected, found }) => assert_eq!((row, expected, found), (2, 3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_row() {
        let f = write("red,17,no\nblue,abc,yes\n");
        assert!(matches!(load_uci_csv(f.path(), &schema()), Err(Error::MalformedRow { row: 2, .. })));
        let f = write("red,NaN,no\n");
        assert!(matches!(load_uci_csv(f.path(), &schema()), Err(Error::MalformedRow { row: 1, .. })));
    }

    #[test]
    fn unknown_label_is_malformed() {
        let f = write("red,17,maybe\n");
        assert!(matches!(load_uci_csv(f.path(), &schema()), Err(Error::MalformedRow { .. })));
    }

    #[test]
    fn empty_file() {
        let f = write("");
        assert!(matches!(load_uci_csv(f.path(), &schema()), Err(Error::EmptyFile(_))));
        let f = write("\n|only a comment\n");
        assert!(matches!(load_uci_csv(f.path(), &schema()), Err(Error::EmptyFile(_))));
    }
}
