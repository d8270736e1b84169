//! Run directories: one per invocation, holding the data files and a manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub params: Value,
    /// Hex SHA-256 of the canonical `{command, params}` document.
    pub params_sha256: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

pub struct RunDir {
    root: PathBuf,
    command: String,
    params: Value,
    params_sha256: String,
    seed: Option<u64>,
    started: DateTime<Utc>,
    files: Vec<(String, Vec<u8>)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunDir {
    /// Nothing touches the disk until [`RunDir::finish`], so failed runs leave no directory.
    pub fn new(root: &Path, command: &str, params: Value, seed: Option<u64>) -> RunDir {
        let canonical = serde_json::json!({ "command": command, "params": params });
        RunDir {
            root: root.to_path_buf(),
            command: command.to_string(),
            params_sha256: sha256_hex(canonical.to_string().as_bytes()),
            params,
            seed,
            started: Utc::now(),
            files: Vec::new(),
        }
    }

    pub fn write(&mut self, file: &str, contents: &[u8]) {
        self.files.push((file.to_string(), contents.to_vec()));
    }

    /// Writes `<root>/<timestamp>-<hash8>` (with a counter suffix on collision) and its manifest.
    pub fn finish(self, threads: usize) -> io::Result<PathBuf> {
        let stem = format!("{}-{}", self.started.format("%Y%m%dT%H%M%SZ"), &self.params_sha256[..8]);
        fs::create_dir_all(&self.root)?;
        let mut k = 0u32;
        let path = loop {
            let name = if k == 0 { stem.clone() } else { format!("{stem}-{k}") };
            let p = self.root.join(name);
            match fs::create_dir(&p) {
                Ok(()) => break p,
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => k += 1,
                Err(e) => return Err(e),
            }
        };
        let mut outputs = Vec::with_capacity(self.files.len());
        for (file, contents) in &self.files {
            fs::write(path.join(file), contents)?;
            outputs.push(OutputDigest {
                file: file.clone(),
                bytes: contents.len() as u64,
                sha256: sha256_hex(contents),
            });
        }
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_BIN_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            argv: std::env::args().collect(),
            params: self.params,
            params_sha256: self.params_sha256,
            seed: self.seed,
            threads,
            started_at: self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(path.join(MANIFEST_FILE), text + "\n")?;
        Ok(path)
    }
}

/// Flattens serializable rows into CSV; nested values become JSON text.
pub fn csv<T: Serialize>(rows: &[T]) -> serde_json::Result<String> {
    let mut out = String::new();
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let Value::Object(map) = serde_json::to_value(row)? else {
            continue;
        };
        let keys = header.get_or_insert_with(|| {
            let keys: Vec<String> = map.keys().cloned().collect();
            out.push_str(&keys.join(","));
            out.push('\n');
            keys
        });
        let cells: Vec<String> = keys.iter().map(|k| cell(map.get(k).unwrap_or(&Value::Null))).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => return String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => return n.to_string(),
        Value::Bool(b) => return b.to_string(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}
