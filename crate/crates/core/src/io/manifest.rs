//! Provenance record written next to every command's outputs.

use super::FormatError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, so the run can be repeated.
    pub args: Vec<String>,
    /// Effective configuration as `key = value` pairs.
    pub config: BTreeMap<String, String>,
    /// SHA-256 of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub started_unix: f64,
    pub finished_unix: f64,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> Result<String, FormatError> {
    let mut f = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| FormatError::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

impl RunManifest {
    pub fn start(command: &str, args: Vec<String>) -> Self {
        Self {
            command: command.into(),
            args,
            config: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix: now(),
            finished_unix: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), FormatError> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn config_pairs(&mut self, pairs: Vec<(String, String)>) {
        self.config.extend(pairs);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(&mut self, path: &Path) -> Result<(), FormatError> {
        self.finished_unix = now();
        let text = serde_json::to_string_pretty(self).map_err(|e| FormatError::invalid(path, e.to_string()))?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| FormatError::io(path, e))?;
        }
        std::fs::write(path, text + "\n").map_err(|e| FormatError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| FormatError::invalid(path, e.to_string()))
    }
}
