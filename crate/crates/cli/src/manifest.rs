//! Output bookkeeping: every emitted file is hashed and listed in
//! `manifest.json` together with the resolved configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Resolved configuration; also written as `config.resolved.toml`.
    pub config: String,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub warnings: Vec<String>,
    pub exit_code: u8,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into the output directory and records their digests.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    #[cfg(test)]
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    #[cfg(test)]
    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, Failure> {
        manifest.outputs = self.files;
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::io(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}
