//! Row persistence: CSV with one header row, or JSON as an array of row
//! objects carrying the same keys in the same order.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Spec(format!("unknown output format `{other}`"))),
        }
    }
}

fn row_object<T: Serialize>(row: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(row)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::Spec("output rows must serialize to objects".into())),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Streaming writer. Every row is flushed as soon as it is pushed, so a
/// later failure leaves earlier rows intact.
pub struct RowWriter {
    out: Box<dyn Write>,
    format: Format,
    header: Option<Vec<String>>,
    rows: usize,
}

impl RowWriter {
    /// Writes to `path`, or to standard output when `path` is `None`.
    pub fn create(path: Option<&Path>, format: Format) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout()),
        };
        Ok(Self::from_writer(out, format))
    }

    pub fn from_writer(out: Box<dyn Write>, format: Format) -> Self {
        RowWriter { out, format, header: None, rows: 0 }
    }

    pub fn rows_written(&self) -> usize {
        self.rows
    }

    pub fn push<T: Serialize>(&mut self, row: &T) -> Result<()> {
        let obj = row_object(row)?;
        let keys: Vec<String> = obj.keys().cloned().collect();
        match &self.header {
            Some(h) if *h != keys => {
                return Err(Error::Spec(format!("row columns {keys:?} differ from header {h:?}")));
            }
            Some(_) => {}
            None => {
                if self.format == Format::Csv {
                    self.write_csv_record(keys.iter().map(String::as_str))?;
                } else {
                    self.out.write_all(b"[\n")?;
                }
                self.header = Some(keys);
            }
        }
        match self.format {
            Format::Csv => {
                let cells: Vec<String> = obj.values().map(cell).collect();
                self.write_csv_record(cells.iter().map(String::as_str))?;
            }
            Format::Json => {
                if self.rows > 0 {
                    self.out.write_all(b",\n")?;
                }
                serde_json::to_writer(&mut self.out, &obj)?;
            }
        }
        self.rows += 1;
        self.out.flush()?;
        Ok(())
    }

    fn write_csv_record<'a>(&mut self, fields: impl Iterator<Item = &'a str>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(fields)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.out.write_all(&bytes)?;
        Ok(())
    }

    /// Closes the JSON array (an empty table becomes `[]`).
    pub fn finish(mut self) -> Result<()> {
        if self.format == Format::Json {
            if self.header.is_none() {
                self.out.write_all(b"[")?;
            }
            self.out.write_all(b"\n]\n")?;
        }
        self.out.flush()?;
        Ok(())
    }
}

/// Writes a whole table at once.
pub fn write_rows<T: Serialize>(path: Option<&Path>, format: Format, rows: &[T]) -> Result<()> {
    let mut w = RowWriter::create(path, format)?;
    for r in rows {
        w.push(r)?;
    }
    w.finish()
}

/// Pretty-printed JSON document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
