use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sidecar written next to the outputs of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub config: BTreeMap<String, String>,
    /// `sha256` of the coefficient bytes, keyed `theta0`, `forcing`, ...
    pub input_hashes: BTreeMap<String, String>,
    /// SHA-256 of the raw configuration text.
    pub config_hash: String,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub status: String,
}

pub fn field_hash(f: &SpectralField) -> String {
    let mut h = Sha256::new();
    h.update((f.grid().dim() as u64).to_le_bytes());
    h.update((f.grid().n() as u64).to_le_bytes());
    h.update(f.coefficient_bytes());
    hex::encode(h.finalize())
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, config_text: &str, threads: usize) -> Self {
        Self {
            command: command.to_string(),
            code_version: CODE_VERSION.to_string(),
            config,
            input_hashes: BTreeMap::new(),
            config_hash: text_hash(config_text),
            threads,
            outputs: Vec::new(),
            started_unix: unix_now(),
            finished_unix: 0.0,
            wall_seconds: 0.0,
            status: "running".into(),
        }
    }

    pub fn add_input(&mut self, name: &str, f: &SpectralField) {
        self.input_hashes.insert(name.to_string(), field_hash(f));
    }

    pub fn finish(&mut self, status: &str) {
        self.finished_unix = unix_now();
        self.wall_seconds = (self.finished_unix - self.started_unix).max(0.0);
        self.status = status.to_string();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest encoding failed: {e}")))?;
        super::write_atomic(path, text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn manifest_json() {
        let g = GridSpec::new(2, 8).unwrap();
        let mut m = RunManifest::new("run", BTreeMap::from([("grid.n".into(), "8".into())]), "grid.n = 8", 1);
        m.add_input("theta0", &SpectralField::zeros(g));
        m.outputs.push("diagnostics.csv".into());
        m.finish("ok");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("manifest.json");
        m.write(&p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["status"], "ok");
        assert_eq!(v["input_hashes"]["theta0"].as_str().unwrap().len(), 64);
        assert_eq!(v["config"]["grid.n"], "8");
    }
}
