use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILED_MARKER: &str = "FAILED";
pub const TOOLKIT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileFingerprint {
    /// As given for inputs, relative to the output directory for outputs.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileFingerprint {
    pub fn of(path: &Path, label: impl Into<String>) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: label.into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub inputs: Vec<FileFingerprint>,
    /// Produced files, excluding `config.txt`, timing logs and the manifest.
    pub outputs: Vec<FileFingerprint>,
    pub toolkit_version: String,
    pub wall_ms: u128,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            toolkit_version: TOOLKIT_VERSION.into(),
            wall_ms: 0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .push(FileFingerprint::of(path, path.display().to_string())?);
        Ok(())
    }

    /// Fingerprints `relative` under `root`.
    pub fn add_output(&mut self, root: &Path, relative: &str) -> Result<()> {
        self.outputs
            .push(FileFingerprint::of(&root.join(relative), relative)?);
        Ok(())
    }

    /// Everything except wall time agrees.
    pub fn same_results(&self, other: &RunManifest) -> bool {
        self.command == other.command
            && self.config_hash == other.config_hash
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.toolkit_version == other.toolkit_version
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        write_atomic(&path, self.to_json().as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::parse(path.display(), e.line(), e.to_string()))
    }
}

/// Records which stage failed; earlier artifacts stay in place.
pub fn write_failed_marker(dir: &Path, stage: &str, error: &Error) -> Result<()> {
    let text = format!("stage: {stage}\nerror: {error}\n");
    write_atomic(&dir.join(FAILED_MARKER), text.as_bytes())
}
