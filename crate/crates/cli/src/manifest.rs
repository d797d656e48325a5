use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Version of the manifest layout and of every CSV schema written next to it.
pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_sha256: Option<String>,
    pub artifacts: Vec<ArtifactRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

/// Collects artifacts for one run and writes them under `dir`, if given.
pub struct ArtifactSink {
    dir: Option<PathBuf>,
    records: Vec<ArtifactRecord>,
}

impl ArtifactSink {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(ArtifactSink {
            dir: dir.map(Path::to_path_buf),
            records: Vec::new(),
        })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(dir) = &self.dir {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            self.records.push(ArtifactRecord {
                file: name.to_string(),
                sha256: sha256_hex(bytes),
            });
        }
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<(), CliError> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        manifest.artifacts = self.records;
        manifest.finished_at = now();
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let m: RunManifest = serde_json::from_str(&text)?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
            m.schema_version
        )));
    }
    Ok(m)
}
