use serde_json::{json, Value};
use triadne::report::{csv_field, SCHEMA};
use triadne::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A plot-ready table: one header row, then one row per item.
pub struct Table {
    pub name: String,
    pub inputs: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, inputs: Value, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            inputs,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "schema": SCHEMA,
            "name": self.name,
            "inputs": self.inputs,
            "columns": self.columns,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&v).expect("table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => csv_field(s),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub enum Output {
    Report(VerificationReport),
    Table(Table),
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        let mut s = match (self, format) {
            (Output::Report(r), Format::Json) => r.to_json(),
            (Output::Report(r), Format::Csv) => r.to_csv(),
            (Output::Table(t), Format::Json) => t.to_json(),
            (Output::Table(t), Format::Csv) => t.to_csv(),
        };
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s
    }

    /// Whether every hard check held. Tables carry no checks.
    pub fn pass(&self) -> bool {
        match self {
            Output::Report(r) => r.pass,
            Output::Table(_) => true,
        }
    }
}

/// Exact integers go out as JSON numbers when they fit, strings otherwise.
pub fn big(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}
