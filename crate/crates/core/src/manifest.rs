//! Run manifests: config snapshot, seeds, derived parameters and a hashed
//! inventory of every output file, so a finished run can be re-validated.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputEntry {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created_utc: String,
    pub master_seed: Option<u64>,
    /// Input configuration snapshot.
    pub config: BTreeMap<String, String>,
    /// Derived run parameters (segment count, resolution, ...).
    pub derived: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
}

/// Verification outcome for one manifest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifiedOutput {
    pub path: String,
    pub ok: bool,
    pub detail: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

impl RunManifest {
    pub fn new(command: &str, master_seed: Option<u64>) -> Self {
        Self {
            tool: "bicoh".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            master_seed,
            config: BTreeMap::new(),
            derived: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set_config(&mut self, config: BTreeMap<String, String>) {
        self.config = config;
    }

    pub fn add_derived(&mut self, key: &str, value: impl ToString) {
        self.derived.insert(key.into(), value.to_string());
    }

    /// Hash `base_dir/name` and add it to the inventory.
    pub fn record_output(&mut self, base_dir: &Path, name: &str) -> Result<()> {
        let bytes = fs::read(base_dir.join(name))?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Re-hash every recorded output under `base_dir`.
    pub fn verify(&self, base_dir: &Path) -> Vec<VerifiedOutput> {
        self.outputs
            .iter()
            .map(|entry| {
                let path = base_dir.join(&entry.path);
                match fs::read(&path) {
                    Err(e) => VerifiedOutput {
                        path: entry.path.clone(),
                        ok: false,
                        detail: format!("unreadable: {e}"),
                    },
                    Ok(bytes) => {
                        let hash = sha256_hex(&bytes);
                        if hash == entry.sha256 {
                            VerifiedOutput {
                                path: entry.path.clone(),
                                ok: true,
                                detail: "ok".into(),
                            }
                        } else {
                            VerifiedOutput {
                                path: entry.path.clone(),
                                ok: false,
                                detail: format!("hash mismatch (expected {}, got {hash})", entry.sha256),
                            }
                        }
                    }
                }
            })
            .collect()
    }
}
