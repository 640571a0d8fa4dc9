//! CSV interchange for samples.
//!
//! Header `P1008,P1012,P1022,P1028,P1029,VoidF1,VoidF2,VoidF3,VoidF4`, one
//! sample per row. Columns are matched by name, so any order is accepted. An
//! optional `InDomain` column (written for generated samples) is read and
//! ignored. Leading `# key=value ...` lines carry run metadata.

use std::path::Path;

use super::{Sample, COLUMN_NAMES, SAMPLE_DIM};
use crate::text::fmt_f64;
use crate::{Error, Result};

pub const IN_DOMAIN_COLUMN: &str = "InDomain";

/// `key=value` pairs from the leading comment lines of a sample file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvMetadata(pub Vec<(String, String)>);

impl CsvMetadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_owned(), value.into()));
    }
}

/// Renders samples as CSV text. When `in_domain_flags` is set, an extra
/// boolean column marks which rows pass the domain filter.
pub fn samples_to_csv(samples: &[Sample], meta: &CsvMetadata, in_domain_flags: bool) -> String {
    let mut out = String::new();
    if !meta.0.is_empty() {
        let pairs: Vec<String> = meta.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str("# ");
        out.push_str(&pairs.join(" "));
        out.push('\n');
    }
    out.push_str(&COLUMN_NAMES.join(","));
    if in_domain_flags {
        out.push(',');
        out.push_str(IN_DOMAIN_COLUMN);
    }
    out.push('\n');
    for s in samples {
        let cells: Vec<String> = s.to_array().iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        if in_domain_flags {
            out.push(',');
            out.push_str(if s.inputs.in_domain() { "true" } else { "false" });
        }
        out.push('\n');
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<(Vec<Sample>, CsvMetadata)> {
    let mut meta = CsvMetadata::default();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        for pair in rest.split_whitespace() {
            if let Some((k, v)) = pair.split_once('=') {
                meta.push(k, v);
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::schema(format!("unreadable header: {e}")))?
        .clone();

    let mut index = [usize::MAX; SAMPLE_DIM];
    for (pos, name) in headers.iter().enumerate() {
        if let Some(c) = COLUMN_NAMES.iter().position(|n| *n == name) {
            if index[c] != usize::MAX {
                return Err(Error::Schema {
                    row: Some(1),
                    column: Some(name.to_owned()),
                    message: "duplicate column".into(),
                });
            }
            index[c] = pos;
        } else if name != IN_DOMAIN_COLUMN {
            return Err(Error::Schema {
                row: Some(1),
                column: Some(name.to_owned()),
                message: "unknown column".into(),
            });
        }
    }
    if let Some(c) = index.iter().position(|&i| i == usize::MAX) {
        return Err(Error::Schema {
            row: Some(1),
            column: Some(COLUMN_NAMES[c].to_owned()),
            message: "missing column".into(),
        });
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize);
            Error::Schema {
                row,
                column: None,
                message: format!("wrong number of fields: {e}"),
            }
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0.0; SAMPLE_DIM];
        for (c, v) in values.iter_mut().enumerate() {
            let cell = record.get(index[c]).unwrap_or("");
            *v = cell.parse().map_err(|_| Error::Schema {
                row: Some(row),
                column: Some(COLUMN_NAMES[c].to_owned()),
                message: format!("'{cell}' is not a number"),
            })?;
        }
        samples.push(Sample::from_array(values));
    }
    Ok((samples, meta))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(samples_from_csv(&text)?.0)
}

pub fn save_csv(path: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, samples_to_csv(samples, &CsvMetadata::default(), false))
        .map_err(|e| Error::io(path, e))
}
