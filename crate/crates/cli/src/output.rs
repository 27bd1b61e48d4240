use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Failure;

/// 17 significant digits, enough for an exact round trip.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with a mandatory header row.
pub struct Csv {
    text: String,
    columns: usize,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len(), rows: 0 }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        write_file(path, self.text.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Run description written next to every output: program version, seed
/// (null when nothing is random), the resolved configuration and the files.
pub fn manifest(command: &str, seed: Option<u64>, config: &impl Serialize, outputs: &[&Path]) -> Result<Value, Failure> {
    let config = serde_json::to_value(config).map_err(|e| Failure::Runtime(e.to_string()))?;
    let outputs: Vec<String> =
        outputs.iter().map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())).collect();
    Ok(json!({
        "program": "spacelike",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
        "outputs": outputs,
    }))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn manifest_path(data: &Path) -> PathBuf {
    data.with_extension("manifest.json")
}
