//! JSON and CSV emission. Floats are rounded to 12 significant digits;
//! non-finite values are written as the strings `inf`, `-inf` and `nan`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn non_finite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// A JSON number, or one of the non-finite markers.
pub fn num(x: f64) -> Value {
    match Number::from_f64(round_sig(x)) {
        Some(n) => Value::Number(n),
        None => Value::String(non_finite(x).to_owned()),
    }
}

/// Rounds every float inside `v`.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(x) if x.is_finite() => round_sig(*x).to_string(),
            Cell::Num(x) => non_finite(*x).to_owned(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Output {
    /// Top-level JSON fields; the config echo is added on emission.
    pub fields: Map<String, Value>,
    pub table: Option<Table>,
}

impl Output {
    pub fn new() -> Self {
        Output { fields: Map::new(), table: None }
    }

    pub fn field(mut self, key: &str, value: Value) -> Self {
        self.fields.insert(key.to_owned(), round_floats(value));
        self
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

impl Default for Output {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_csv<W: Write>(table: &Table, w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&table.header)?;
    for row in &table.rows {
        wtr.write_record(row.iter().map(Cell::render))?;
    }
    wtr.flush().map_err(|e| CliError::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}

/// Writes `out` in `format` to `path`, or to stdout.
pub fn emit(out: Output, config: Value, format: Format, path: Option<&Path>, command: &str) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = io::BufWriter::new(sink);
    let where_ = path.map_or_else(|| "<stdout>".to_owned(), |p| p.display().to_string());
    match format {
        Format::Json => {
            let mut fields = out.fields;
            fields.insert("config".into(), config);
            serde_json::to_writer_pretty(&mut sink, &Value::Object(fields))?;
            writeln!(sink).map_err(|e| CliError::Io { path: where_.clone(), source: e })?;
        }
        Format::Csv => {
            let table = out
                .table
                .ok_or_else(|| CliError::Config(format!("{command} has no CSV output; use --format json")))?;
            write_csv(&table, &mut sink)?;
        }
    }
    sink.flush().map_err(|e| CliError::Io { path: where_, source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.06592900016867019), 0.0659290001687);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-123456.7890123456), -123456.789012);
        assert_eq!(round_sig(0.0), 0.0);
        assert!(round_sig(-0.0).is_sign_positive());
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
    }

    #[test]
    fn csv_cells_render() {
        let t = Table {
            header: vec!["n", "x", "tag"],
            rows: vec![vec![Cell::Int(5), Cell::Num(2.0 / 3.0), Cell::Text("a".into())], vec![
                Cell::Int(6),
                Cell::Num(f64::NEG_INFINITY),
                Cell::Text("b".into()),
            ]],
        };
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,x,tag\n5,0.666666666667,a\n6,-inf,b\n");
    }

    #[test]
    fn nested_floats_are_rounded() {
        let v = serde_json::json!({"a": [0.1234567890123456, 3], "b": {"c": 2.0000000000001}});
        let r = round_floats(v);
        assert_eq!(r["a"][0], serde_json::json!(0.123456789012));
        assert_eq!(r["a"][1], serde_json::json!(3));
        assert_eq!(r["b"]["c"], serde_json::json!(2.0));
    }
}
