use std::io::Write;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A result table. Every subcommand produces exactly one.
pub struct Table {
    pub command: &'static str,
    pub caps: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table { command, caps: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn cap(mut self, name: &'static str, value: impl Into<Value>) -> Self {
        self.caps.push((name, value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> anyhow::Result<()> {
        match format {
            Format::Json => self.write_json(out),
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_json(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        let mut top = Map::new();
        top.insert("command".into(), Value::from(self.command));
        top.insert("caps".into(), Value::Object(self.caps.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()));
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(k, v)| (k.to_string(), v.clone())).collect()))
            .collect();
        top.insert("rows".into(), Value::Array(rows));
        serde_json::to_writer_pretty(&mut *out, &Value::Object(top))?;
        writeln!(out)?;
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A searched value, or the string `unknown`.
pub fn known(v: Option<usize>) -> Value {
    v.map_or_else(|| Value::from("unknown"), Value::from)
}

/// Rounds to six decimals for stable tables.
pub fn decimal(x: f64) -> Value {
    let rounded = (x * 1e6).round() / 1e6;
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}
