use std::path::Path;

use crate::data::schema::{ColumnKind, ColumnRole, Schema};
use crate::{Error, Result};

/// A parsed cell. Numeric columns hold numbers, categorical columns text.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

impl RawValue {
    pub fn as_text(&self) -> String {
        match self {
            RawValue::Number(x) => x.to_string(),
            RawValue::Text(s) => s.clone(),
        }
    }
}

/// Rows of a CSV file restricted to the columns a schema uses.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub schema: Schema,
    /// One entry per used schema column, in schema order.
    pub rows: Vec<Vec<RawValue>>,
    /// 1-based line number of each kept row in the source file.
    pub lines: Vec<usize>,
    pub dropped: usize,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keeps only the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> RawTable {
        RawTable {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            lines: indices.iter().map(|&i| self.lines[i]).collect(),
            dropped: 0,
        }
    }

    /// Position of a column among the used columns.
    pub(crate) fn column_index(&self, name: &str) -> Option<usize> {
        used_columns(&self.schema).position(|c| c == name)
    }
}

fn used_columns(schema: &Schema) -> impl Iterator<Item = &str> {
    schema
        .columns
        .iter()
        .filter(|c| c.role != ColumnRole::Ignore)
        .map(|c| c.name.as_str())
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "?" | "NA" | "NaN" | "nan")
}

/// Reads a header-row, comma-delimited CSV file.
///
/// Rows with a missing value in a used column, or with the wrong number of
/// fields, are dropped and counted. A numeric field that is present but not a
/// number is an error.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file, schema)
}

pub(crate) fn read_table<R: std::io::Read>(reader: R, schema: &Schema) -> Result<RawTable> {
    schema.validate()?;
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    let n_fields = header.len();

    let mut positions = Vec::new();
    for spec in schema
        .columns
        .iter()
        .filter(|c| c.role != ColumnRole::Ignore)
    {
        let pos = header
            .iter()
            .position(|h| h == spec.name)
            .ok_or_else(|| Error::MissingColumn(spec.name.clone()))?;
        positions.push((pos, spec));
    }

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut dropped = 0;
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != n_fields {
            dropped += 1;
            continue;
        }
        let mut values = Vec::with_capacity(positions.len());
        let mut complete = true;
        for &(pos, spec) in &positions {
            let field = &record[pos];
            if is_missing(field) {
                complete = false;
                break;
            }
            let value = match spec.kind {
                ColumnKind::Numeric if spec.role == ColumnRole::Feature => {
                    let x: f64 = field.parse().map_err(|_| Error::UnparseableRow {
                        line,
                        column: spec.name.clone(),
                        value: field.to_string(),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::UnparseableRow {
                            line,
                            column: spec.name.clone(),
                            value: field.to_string(),
                        });
                    }
                    RawValue::Number(x)
                }
                _ => RawValue::Text(field.to_string()),
            };
            values.push(value);
        }
        if complete {
            rows.push(values);
            lines.push(line);
        } else {
            dropped += 1;
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    log::info!("loaded {} rows, dropped {}", rows.len(), dropped);
    Ok(RawTable {
        schema: schema.clone(),
        rows,
        lines,
        dropped,
    })
}
