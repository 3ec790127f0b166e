//! Run reports: a flat `key=value` text form and a JSON summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Result of one command.
///
/// `metrics`, `tables`, `notes` and `passed` are a pure function of the
/// config; wall-clock measurements live in `timings` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub tables: BTreeMap<String, Table>,
    pub timings: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    /// Threshold verdict, when the command has one.
    pub passed: Option<bool>,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunReport {
            command: command.to_string(),
            config: config.clone(),
            metrics: BTreeMap::new(),
            tables: BTreeMap::new(),
            timings: BTreeMap::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
            passed: None,
        }
    }

    pub fn metric(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.metrics.insert(key.into(), value.into());
    }

    pub fn timing(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.timings.insert(key.into(), value.into());
    }

    /// Everything that must be identical across reruns.
    pub fn metric_section(&self) -> Value {
        serde_json::json!({
            "metrics": self.metrics,
            "tables": self.tables,
            "notes": self.notes,
            "passed": self.passed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        if let Some(p) = self.passed {
            let _ = writeln!(out, "passed={p}");
        }
        flatten(&mut out, "config", &serde_json::to_value(&self.config).unwrap_or(Value::Null));
        for (k, v) in &self.metrics {
            flatten(&mut out, &format!("metric.{k}"), v);
        }
        for (name, table) in &self.tables {
            for (i, row) in table.rows.iter().enumerate() {
                for (c, v) in table.columns.iter().zip(row) {
                    flatten(&mut out, &format!("table.{name}.{i}.{c}"), v);
                }
            }
        }
        for (k, v) in &self.timings {
            flatten(&mut out, &format!("timing.{k}"), v);
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(out, "note.{i}={n}");
        }
        for (i, a) in self.artifacts.iter().enumerate() {
            let _ = writeln!(out, "artifact.{i}={}", a.display());
        }
        out
    }

    /// Writes `report.txt` and `summary.json` into `dir`, one writer per run.
    pub fn write(&mut self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let txt = dir.join("report.txt");
        let json = dir.join("summary.json");
        for p in [&txt, &json] {
            if !self.artifacts.contains(p) {
                self.artifacts.push(p.clone());
            }
        }
        fs::write(&txt, self.to_key_value())?;
        fs::write(&json, self.to_json())?;
        Ok(())
    }
}

fn flatten(out: &mut String, prefix: &str, v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(out, &format!("{prefix}.{k}"), v);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(out, &format!("{prefix}.{i}"), v);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            let _ = writeln!(out, "{prefix}={}", parts.join(","));
        }
        _ => {
            let _ = writeln!(out, "{prefix}={}", scalar(v));
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// JSON number for finite values, the string `"nan"`/`"inf"` otherwise.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(format!("{x}").to_lowercase()), Value::Number)
}
