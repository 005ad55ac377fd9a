//! Output bundle: a directory of artifacts plus `metadata.json` (effective
//! configuration and conventions) and `index.json` (manifest with content
//! hashes).
//!
//! Files are written to a sibling staging directory and moved into place only
//! when the whole run succeeds, so a failed run leaves no partial outputs. A
//! lockfile next to the output directory keeps concurrent runs apart.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::exit::{CliError, ErrorKind};

pub const MANIFEST: &str = "index.json";
pub const METADATA: &str = "metadata.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub kind: String,
    pub bytes: usize,
    pub sha256: String,
}

pub struct Bundle {
    target: PathBuf,
    staging: PathBuf,
    lock: PathBuf,
    artifacts: BTreeMap<String, Artifact>,
    metadata: BTreeMap<String, Value>,
    finished: bool,
}

fn sibling(target: &Path, suffix: &str) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    target.with_file_name(format!(".{name}.{suffix}"))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn kind_of(path: &str) -> &'static str {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("csv") => "table",
        Some("svg") => "chart",
        Some("dot") | Some("graphml") => "network",
        Some("json") => "metadata",
        _ => "other",
    }
}

impl Bundle {
    pub fn create(target: &Path) -> Result<Self, CliError> {
        if target.as_os_str().is_empty() {
            return Err(CliError::config("output_dir: must not be empty"));
        }
        if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let lock = sibling(target, "lock");
        fs::OpenOptions::new().write(true).create_new(true).open(&lock).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                CliError::io(&lock, "output directory is locked by another run (remove the lockfile if stale)")
            } else {
                CliError::io(&lock, e)
            }
        })?;
        let staging = sibling(target, "partial");
        let bundle = Self {
            target: target.to_path_buf(),
            staging,
            lock,
            artifacts: BTreeMap::new(),
            metadata: BTreeMap::new(),
            finished: false,
        };
        if bundle.staging.exists() {
            fs::remove_dir_all(&bundle.staging).map_err(|e| CliError::io(&bundle.staging, e))?;
        }
        fs::create_dir_all(&bundle.staging).map_err(|e| CliError::io(&bundle.staging, e))?;
        Ok(bundle)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.staging.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.insert(
            rel.to_string(),
            Artifact {
                path: rel.to_string(),
                kind: kind_of(rel).to_string(),
                bytes: bytes.len(),
                sha256: hex(&Sha256::digest(bytes)),
            },
        );
        Ok(())
    }

    /// Adds a top-level entry to `metadata.json`.
    pub fn set_metadata(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metadata is serializable");
        self.metadata.insert(key.to_string(), v);
    }

    /// Appends to a list-valued metadata entry.
    pub fn push_metadata(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metadata is serializable");
        match self.metadata.entry(key.to_string()).or_insert_with(|| json!([])) {
            Value::Array(a) => a.push(v),
            other => *other = json!([v]),
        }
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Artifact> {
        self.artifacts.values()
    }

    /// Writes metadata and manifest, then replaces `target` with the staged
    /// directory. An existing `target` is only replaced if it is empty or a
    /// previous bundle.
    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        let metadata = serde_json::to_vec_pretty(&self.metadata).expect("metadata is serializable");
        self.write(METADATA, &[metadata.as_slice(), b"\n"].concat())?;
        let manifest = json!({
            "metadata": METADATA,
            "artifacts": self.artifacts.values().collect::<Vec<_>>(),
        });
        let manifest = serde_json::to_vec_pretty(&manifest).expect("manifest is serializable");
        fs::write(self.staging.join(MANIFEST), [manifest.as_slice(), b"\n"].concat())
            .map_err(|e| CliError::io(&self.staging, e))?;

        if self.target.exists() {
            let previous_bundle = self.target.join(MANIFEST).is_file();
            let empty = fs::read_dir(&self.target).map(|mut d| d.next().is_none()).unwrap_or(false);
            if !(previous_bundle || empty) {
                return Err(CliError {
                    kind: ErrorKind::Config,
                    stage: None,
                    message: format!(
                        "output_dir: {} exists and is not a previous output bundle; refusing to overwrite",
                        self.target.display()
                    ),
                });
            }
            fs::remove_dir_all(&self.target).map_err(|e| CliError::io(&self.target, e))?;
        }
        fs::rename(&self.staging, &self.target).map_err(|e| CliError::io(&self.target, e))?;
        self.finished = true;
        Ok(self.target.clone())
    }
}

impl Drop for Bundle {
    fn drop(&mut self) {
        if !self.finished {
            let _ = fs::remove_dir_all(&self.staging);
        }
        let _ = fs::remove_file(&self.lock);
    }
}
