//! Header-addressed CSV reading with row/column error reporting, and a
//! small writer that keeps float formatting deterministic.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Issue, Result};

/// A parsed CSV file whose columns are looked up by header name.
pub(crate) struct Table {
    pub file: String,
    columns: HashMap<String, usize>,
    pub rows: Vec<csv::StringRecord>,
}

impl Table {
    /// Reads a table and rejects it if any `required` column is missing.
    /// Lines starting with `#` are comments.
    pub fn read(reader: impl Read, file: &str, required: &[&str]) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let columns: HashMap<String, usize> = rdr
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let missing: Vec<Issue> = required
            .iter()
            .filter(|c| !columns.contains_key(**c))
            .map(|c| Issue {
                row: None,
                column: Some(c.to_string()),
                message: "required column is missing".into(),
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::Schema {
                file: file.into(),
                issues: missing,
            });
        }
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table {
            file: file.into(),
            columns,
            rows,
        })
    }

    pub fn open(path: &Path, required: &[&str]) -> Result<Table> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Table::read(f, &name, required)
    }

    /// Iterates rows with a 1-based data row number.
    pub fn cursor(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().enumerate().map(|(i, rec)| Row {
            table: self,
            number: i + 1,
            rec,
        })
    }

    pub fn fail(&self, issues: Vec<Issue>) -> Result<()> {
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema {
                file: self.file.clone(),
                issues,
            })
        }
    }
}

pub(crate) struct Row<'a> {
    table: &'a Table,
    pub number: usize,
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    pub fn raw(&self, column: &str) -> &str {
        self.table
            .columns
            .get(column)
            .and_then(|&i| self.rec.get(i))
            .unwrap_or("")
    }

    /// Parses a field, recording an issue on failure.
    pub fn parse<T: FromStr>(&self, column: &str, issues: &mut Vec<Issue>) -> Option<T> {
        let raw = self.raw(column);
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                issues.push(Issue::at(self.number, column, format!("cannot parse {raw:?}")));
                None
            }
        }
    }

    /// Parses a `;`-separated list; an empty field is an empty list.
    pub fn parse_list<T: FromStr>(&self, column: &str, issues: &mut Vec<Issue>) -> Option<Vec<T>> {
        let raw = self.raw(column);
        if raw.is_empty() {
            return Some(Vec::new());
        }
        let parsed: std::result::Result<Vec<T>, _> = raw.split(';').map(|s| s.trim().parse()).collect();
        match parsed {
            Ok(v) => Some(v),
            Err(_) => {
                issues.push(Issue::at(self.number, column, format!("cannot parse list {raw:?}")));
                None
            }
        }
    }
}

/// Writes a CSV file with the given header. Fields are preformatted.
pub(crate) fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}


pub(crate) fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

/// Fixed six-decimal rendering for derived report values.
pub(crate) fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

pub(crate) fn fixed_opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}
