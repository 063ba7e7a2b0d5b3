use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// How a run ended, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Feasible, verified, or no violations.
    Ok,
    /// Infeasible, no coloring, or violations found.
    Negative,
    Indeterminate,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Negative => 2,
            Status::Indeterminate => 3,
        }
    }
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<InputFile>,
    pub seed: u64,
    pub samples: u64,
    pub tol: Option<f64>,
    pub partial: bool,
    pub format: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl RunConfig {
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    /// Flat `(key, value)` rows for the CSV summary.
    pub summary: Vec<(String, Value)>,
}

/// Rounds every float in `v` to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            *v = json!(rounded);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

pub fn envelope(config: &RunConfig, outcome: &Outcome) -> Value {
    let mut report = Map::new();
    report.insert("tool".into(), json!("qlike"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    report.insert("config_hash".into(), json!(config.hash()));
    report.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    report.insert("status".into(), serde_json::to_value(outcome.status).expect("status serializes"));
    report.insert("result".into(), outcome.result.clone());
    let mut v = Value::Object(report);
    round_numbers(&mut v);
    v
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render(config: &RunConfig, outcome: &Outcome) -> Vec<u8> {
    if config.format == "csv" {
        let mut w = csv::Writer::from_writer(Vec::new());
        let hash = config.hash();
        let mut rows: Vec<(String, String)> = vec![
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("config_hash".into(), hash),
            ("seed".into(), config.seed.to_string()),
            ("samples".into(), config.samples.to_string()),
            ("status".into(), scalar_text(&serde_json::to_value(outcome.status).expect("status serializes"))),
        ];
        for (k, v) in &outcome.summary {
            let mut v = v.clone();
            round_numbers(&mut v);
            rows.push((k.clone(), scalar_text(&v)));
        }
        w.write_record(["key", "value"]).expect("in-memory write");
        for (k, v) in rows {
            w.write_record([k, v]).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    } else {
        let mut text = serde_json::to_vec_pretty(&envelope(config, outcome)).expect("report serializes");
        text.push(b'\n');
        text
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
