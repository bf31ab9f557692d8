//! Bit-stable reports: numbers are written as decimal strings with 17
//! significant digits, `inf` for +∞.

use serde_json::{Map, Value};

use super::config::{ExperimentConfig, Format};
use crate::error::{Error, Result};

pub fn num(x: f64) -> Value {
    Value::String(fmt_num(x))
}

pub fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn vectors(vs: &[Vec<f64>]) -> Value {
    Value::Array(vs.iter().map(|v| vector(v)).collect())
}

/// One record: an ordered map from column to value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Map<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record(Map::new())
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn num(self, key: &str, x: f64) -> Self {
        self.with(key, num(x))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    /// Numeric field parsed back from its string form.
    pub fn number(&self, key: &str) -> Option<f64> {
        match self.0.get(key)? {
            Value::String(s) => match s.as_str() {
                "inf" => Some(f64::INFINITY),
                "-inf" => Some(f64::NEG_INFINITY),
                "nan" => Some(f64::NAN),
                other => other.parse().ok(),
            },
            _ => None,
        }
    }

    pub fn passed(&self) -> Option<bool> {
        self.0.get("passed").and_then(Value::as_bool)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub summary: Map<String, Value>,
}

impl ExperimentReport {
    /// Summary fields derived from the records, followed by `extra`.
    pub fn new(config: ExperimentConfig, records: Vec<Record>, extra: Map<String, Value>) -> Self {
        let summary = summarize(&records, extra);
        ExperimentReport {
            config,
            records,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.get("passed").and_then(Value::as_bool).unwrap_or(true)
    }

    pub fn to_json(&self) -> String {
        let mut top = Map::new();
        top.insert(
            "config".into(),
            serde_json::to_value(&self.config).expect("config serializes"),
        );
        top.insert(
            "records".into(),
            Value::Array(self.records.iter().map(|r| Value::Object(r.0.clone())).collect()),
        );
        top.insert("summary".into(), Value::Object(self.summary.clone()));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header row plus one row per record; nested values are written as
    /// compact JSON text inside a quoted field.
    pub fn to_csv(&self) -> Result<String> {
        let mut columns: Vec<String> = Vec::new();
        for r in &self.records {
            for k in r.0.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&columns).map_err(io)?;
        for r in &self.records {
            let row: Vec<String> = columns
                .iter()
                .map(|c| match r.0.get(c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                })
                .collect();
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Counts and the worst `residual` over the records; `passed` is false when
/// any record failed or `extra` says so.
pub fn summarize(records: &[Record], extra: Map<String, Value>) -> Map<String, Value> {
    let checked = records.iter().filter(|r| r.passed().is_some()).count();
    let failed = records.iter().filter(|r| r.passed() == Some(false)).count();
    let worst = records
        .iter()
        .filter_map(|r| r.number("residual"))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let mut m = Map::new();
    m.insert("records".into(), Value::from(records.len()));
    m.insert("checked".into(), Value::from(checked));
    m.insert("failed".into(), Value::from(failed));
    if let Some(w) = worst {
        m.insert("worst_residual".into(), num(w));
    }
    let extra_ok = extra.get("passed").and_then(Value::as_bool).unwrap_or(true);
    for (k, v) in extra {
        if k != "passed" {
            m.insert(k, v);
        }
    }
    m.insert("passed".into(), Value::Bool(failed == 0 && extra_ok));
    m
}
