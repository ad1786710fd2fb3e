use std::fs;
use std::io::Write;

use serde_json::{Map, Value};

use super::Cli;
use crate::error::{FrameError, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// Result of one command before serialization.
pub struct Outcome {
    pub command: &'static str,
    pub code: i32,
    /// JSON object of report fields.
    pub body: Value,
    pub human: String,
    /// Native CSV form; other reports are flattened to `key,value` rows.
    pub csv: Option<String>,
}

/// `{"schema": 1, "command": ..., ...body}`; keys come out sorted.
pub fn json_document(outcome: &Outcome) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), Value::from(SCHEMA_VERSION));
    map.insert("command".into(), Value::from(outcome.command));
    map.insert("exit_code".into(), Value::from(outcome.code));
    if let Value::Object(body) = &outcome.body {
        for (k, v) in body {
            map.insert(k.clone(), v.clone());
        }
    }
    Value::Object(map)
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn flat_csv(doc: &Value) -> Result<String> {
    let mut rows = Vec::new();
    flatten("", doc, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| FrameError::Numerical(format!("csv output failed: {e}"));
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| FrameError::Numerical(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8"))
}

pub fn render(outcome: &Outcome, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&json_document(outcome))
                .expect("JSON values serialize");
            text.push('\n');
            Ok(text)
        }
        Format::Csv => match &outcome.csv {
            Some(text) => Ok(text.clone()),
            None => flat_csv(&json_document(outcome)),
        },
        Format::Human => {
            let mut text = outcome.human.clone();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            Ok(text)
        }
    }
}

pub fn emit(cli: &Cli, outcome: &Outcome, stdout: &mut dyn Write) -> Result<()> {
    let text = render(outcome, cli.common.format)?;
    match &cli.common.out {
        Some(path) => fs::write(path, text).map_err(|e| FrameError::Parse {
            path: path.display().to_string(),
            message: format!("cannot write report: {e}"),
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| FrameError::Parse {
            path: "<stdout>".into(),
            message: e.to_string(),
        }),
    }
}
