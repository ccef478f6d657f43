//! Machine-readable records plus a human summary.
//!
//! Every record key carries a unit suffix (see [`UNIT_SUFFIXES`]). Values in
//! dB are rounded to two decimals on output; other reals keep ten
//! significant digits so that reports are stable across platforms.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::error::{invalid, Error, Result};

/// Accepted key suffixes for numeric fields.
pub const UNIT_SUFFIXES: &[&str] = &[
    "_db", "_db_per_km", "_km", "_m", "_hz", "_ghz", "_k", "_ohm", "_photons", "_ebit", "_ratio", "_nats",
    "_nepers", "_prob", "_count", "_index",
];
/// Suffix for text fields.
pub const LABEL_SUFFIX: &str = "_label";

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Number(f64),
    Integer(u64),
    Text(String),
}

/// An ordered set of `key = value` pairs; one per sweep point or table row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    fields: Vec<(String, Field)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn number(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.fields.push((key.into(), Field::Number(value)));
        self
    }

    pub fn integer(&mut self, key: impl Into<String>, value: u64) -> &mut Self {
        self.fields.push((key.into(), Field::Integer(value)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.fields.push((key.into(), Field::Text(value.into())));
        self
    }

    pub fn fields(&self) -> &[(String, Field)] {
        &self.fields
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_number(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Field::Number(v) => Some(*v),
            Field::Integer(v) => Some(*v as f64),
            Field::Text(_) => None,
        }
    }

    fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }
}

pub fn has_unit_suffix(key: &str) -> bool {
    UNIT_SUFFIXES.iter().any(|s| key.ends_with(s))
}

/// Rejects any field whose key does not carry a unit (or label) suffix.
pub fn lint_units(records: &[Record]) -> Result<()> {
    for record in records {
        for (key, value) in &record.fields {
            let ok = match value {
                Field::Text(_) => key.ends_with(LABEL_SUFFIX),
                _ => has_unit_suffix(key),
            };
            if !ok {
                return Err(invalid(format!("report field `{key}` has no unit suffix")));
            }
        }
    }
    Ok(())
}

fn is_decibel(key: &str) -> bool {
    key.ends_with("_db")
}

/// Value as printed for `key`.
pub fn display_number(key: &str, value: f64) -> f64 {
    let v = if is_decibel(key) {
        (value * 100.0).round() / 100.0
    } else {
        format!("{value:.9e}").parse().unwrap_or(value)
    };
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn json_number(key: &str, value: f64) -> Result<Value> {
    Number::from_f64(display_number(key, value))
        .map(Value::Number)
        .ok_or_else(|| Error::Unphysical(format!("report field `{key}` is not finite ({value})")))
}

fn json_value(key: &str, field: &Field) -> Result<Value> {
    match field {
        Field::Number(v) => json_number(key, *v),
        Field::Integer(v) => Ok(Value::from(*v)),
        Field::Text(s) => Ok(Value::String(s.clone())),
    }
}

/// Text form shared by the CSV writer and the summary.
pub fn format_field(key: &str, field: &Field) -> Result<String> {
    Ok(match json_value(key, field)? {
        Value::String(s) => s,
        other => other.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}` (expected csv or json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub records: Vec<Record>,
    pub summary: String,
}

impl Report {
    pub fn new(records: Vec<Record>, summary: String) -> Self {
        Self { records, summary }
    }

    pub fn lint(&self) -> Result<()> {
        lint_units(&self.records)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// One header row; every record must have the same keys in the same order.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        if let Some(first) = self.records.first() {
            let header: Vec<&str> = first.keys().collect();
            writer.write_record(&header)?;
            for (i, record) in self.records.iter().enumerate() {
                if !record.keys().eq(header.iter().copied()) {
                    return Err(invalid(format!("record {i} has different columns from record 0")));
                }
                let row = record
                    .fields
                    .iter()
                    .map(|(k, v)| format_field(k, v))
                    .collect::<Result<Vec<_>>>()?;
                writer.write_record(&row)?;
            }
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows = self
            .records
            .iter()
            .map(|r| {
                let mut map = Map::new();
                for (k, v) in &r.fields {
                    map.insert(k.clone(), json_value(k, v)?);
                }
                Ok(Value::Object(map))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut text = serde_json::to_string_pretty(&Value::Array(rows)).map_err(|e| invalid(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut a = Record::new();
        a.integer("point_index", 0).number("loss_db", 106.4213).number("occupation_photons", 1249.5000000000002);
        let mut b = Record::new();
        b.integer("point_index", 1).number("loss_db", -0.001).number("occupation_photons", 2.5e-11);
        Report::new(vec![a, b], "summary\n".into())
    }

    #[test]
    fn csv_layout_and_rounding() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(
            csv,
            "point_index,loss_db,occupation_photons\n0,106.42,1249.5\n1,0.0,2.5e-11\n"
        );
    }

    #[test]
    fn json_layout() {
        let json = sample().to_json().unwrap();
        let parsed: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["loss_db"], serde_json::json!(106.42));
        assert_eq!(parsed[1]["point_index"], serde_json::json!(1));
        assert!(json.find("point_index").unwrap() < json.find("loss_db").unwrap());
    }

    #[test]
    fn linter_rejects_unitless_keys() {
        assert!(sample().lint().is_ok());
        let mut bad = Record::new();
        bad.number("temperature", 4.0);
        assert!(lint_units(&[bad]).is_err());
        let mut label = Record::new();
        label.text("band_label", "optics");
        assert!(lint_units(&[label.clone()]).is_ok());
        label.text("band", "optics");
        assert!(lint_units(&[label]).is_err());
    }

    #[test]
    fn ragged_records_and_non_finite_values_fail() {
        let mut r = sample();
        r.records[1].number("extra_db", 1.0);
        assert!(r.to_csv().is_err());
        let mut inf = Record::new();
        inf.number("loss_db", f64::INFINITY);
        assert!(Report::new(vec![inf], String::new()).to_json().is_err());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
