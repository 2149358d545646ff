//! Tabular output in CSV, JSON or a gnuplot-friendly column layout.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use selfish_cc_core::Rational;
use serde_json::{json, Map, Value};

use crate::decimal::to_decimal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Int(i128),
    Exact(Rational),
    Text(String),
}

impl From<Rational> for Cell {
    fn from(r: Rational) -> Self {
        Cell::Exact(r)
    }
}

impl From<Option<Rational>> for Cell {
    fn from(r: Option<Rational>) -> Self {
        r.map_or(Cell::Empty, Cell::Exact)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(i128::from(n))
    }
}

impl From<u128> for Cell {
    fn from(n: u128) -> Self {
        Cell::Int(n as i128)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    fn render(&self, precision: usize) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Exact(r) => to_decimal(*r, precision),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self, precision: usize) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(n) => json!(n.to_string().parse::<serde_json::Number>().unwrap()),
            Cell::Exact(r) => json!({
                "decimal": to_decimal(*r, precision),
                "num": r.numer(),
                "den": r.denom(),
            }),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(precision)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated columns, `#`-prefixed header, `NaN` for empty
    /// cells.
    pub fn write_gnuplot<W: Write>(&self, mut out: W, precision: usize) -> Result<()> {
        writeln!(out, "# {}", self.columns.join(" "))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Empty => "NaN".to_string(),
                    Cell::Text(s) => format!("\"{s}\""),
                    other => other.render(precision),
                })
                .collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }

    pub fn to_json(&self, precision: usize) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.clone(), cell.to_json(precision)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }

    pub fn write<W: Write>(&self, mut out: W, format: Format, precision: usize, gnuplot: bool) -> Result<()> {
        match (format, gnuplot) {
            (_, true) => self.write_gnuplot(out, precision),
            (Format::Csv, false) => self.write_csv(out, precision),
            (Format::Json, false) => {
                serde_json::to_writer_pretty(&mut out, &self.to_json(precision))?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}
