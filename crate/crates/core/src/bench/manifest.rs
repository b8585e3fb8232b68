//! Generation manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
    /// Level on the scale of the library the factor is modelled on.
    pub native_severity: u8,
    pub seed: u64,
    /// Output path relative to the manifest directory.
    pub path: String,
    pub sha256: String,
    pub parameters: BTreeMap<String, f64>,
    pub surrogate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTask {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub global_seed: u64,
    /// Working size `[width, height]`, or `None` for the source size.
    pub size: Option<[usize; 2]>,
    pub records: Vec<ManifestRecord>,
    #[serde(default)]
    pub skipped: Vec<SkippedTask>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Records whose file under `root` is missing or no longer matches its
    /// hash.
    pub fn verify(&self, root: impl AsRef<Path>) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for r in &self.records {
            let p = root.as_ref().join(&r.path);
            match std::fs::read(&p) {
                Ok(bytes) if sha256_hex(&bytes) == r.sha256 => {}
                _ => bad.push(r.path.clone()),
            }
        }
        Ok(bad)
    }
}
