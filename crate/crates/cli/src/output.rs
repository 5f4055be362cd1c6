//! Tabular and report output. Numbers are written in their shortest
//! round-tripping form so that identical inputs give identical bytes.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Shortest decimal that parses back to `x`; non-finite values use the
/// spellings Rust's float parser accepts.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&x).expect("finite floats always serialize")
    }
}

/// A fixed-column table. Reference rows precede the data rows in CSV and
/// are lifted into a `reference` object in JSON.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: &'static [&'static str],
    pub reference: Vec<(&'static str, f64)>,
    pub reference_rows: Vec<Vec<Cell>>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &'static [&'static str]) -> Self {
        Self { command, columns, reference: Vec::new(), reference_rows: Vec::new(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// A reference value shown in CSV as a row keyed by `name` with the
    /// value placed under `column`.
    pub fn push_reference(&mut self, name: &'static str, column: &str, value: f64) {
        let row = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| match (i, *c == column) {
                (0, _) => Cell::from(name),
                (_, true) => Cell::Num(value),
                _ => Cell::Empty,
            })
            .collect();
        self.reference.push((name, value));
        self.reference_rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in self.reference_rows.iter().chain(&self.rows) {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json<P: Serialize>(&self, version: &str, params: &P) -> Result<Value, CliError> {
        let mut doc = Map::new();
        doc.insert("version".into(), Value::from(version));
        doc.insert("command".into(), Value::from(self.command));
        doc.insert("params".into(), serde_json::to_value(params)?);
        if !self.reference.is_empty() {
            let reference: Map<String, Value> = self
                .reference
                .iter()
                .map(|(name, v)| (name.to_string(), Cell::Num(*v).to_json()))
                .collect();
            doc.insert("reference".into(), Value::Object(reference));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| (c.to_string(), cell.to_json()))
                        .collect(),
                )
            })
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        Ok(Value::Object(doc))
    }
}

/// Result of one subcommand, ready to be written.
#[derive(Debug, Clone)]
pub enum Output {
    Table { table: Table, params: Value },
    Report(Value),
}

impl Output {
    pub fn write<W: Write>(&self, format: Format, version: &str, mut out: W) -> Result<(), CliError> {
        match (self, format) {
            (Output::Table { table, .. }, Format::Csv) => table.write_csv(out),
            (Output::Table { table, params }, Format::Json) => {
                write_json(&table.to_json(version, params)?, &mut out)
            }
            (Output::Report(doc), Format::Json) => write_json(doc, &mut out),
            (Output::Report(_), Format::Csv) => {
                Err(CliError::Usage("this report is only available as JSON".into()))
            }
        }
    }
}

fn write_json<W: Write>(doc: &Value, out: &mut W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-300, 123456.789, f64::MIN_POSITIVE, 3.756409574030895] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(f64::NEG_INFINITY).parse::<f64>().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn reference_rows_lead_the_csv() {
        let mut t = Table::new("demo", &["kind", "a", "b"]);
        t.push_reference("top", "b", 2.5);
        t.push(vec![Cell::from("x"), Cell::from(1usize), Cell::from(0.5)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "kind,a,b\ntop,,2.5\nx,1,0.5\n");
        let doc = t.to_json("v", &serde_json::json!({})).unwrap();
        assert_eq!(doc["reference"]["top"], 2.5);
        assert_eq!(doc["rows"][0]["a"], 1);
    }
}
