//! `manifest.json`: what was run, with which options and inputs, and what it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Every flag with its effective value; usable as `--config`.
    pub options: serde_json::Map<String, Value>,
    /// SHA-256 of each input file, keyed by the path as given.
    pub input_hashes: BTreeMap<String, String>,
    pub base_seed: Option<u64>,
    pub seed_generated: bool,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Files written, relative to the output directory, sorted.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrinkage_warning: Option<bool>,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(command: &str, options: serde_json::Map<String, Value>, base_seed: Option<u64>, seed_generated: bool) -> Self {
        RunManifest {
            command: command.to_owned(),
            options,
            input_hashes: BTreeMap::new(),
            base_seed,
            seed_generated,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_unix: now_unix(),
            finished_unix: 0,
            outputs: Vec::new(),
            warnings: Vec::new(),
            shrinkage_warning: None,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let h = sha256_file(path)?;
        self.input_hashes.insert(path.display().to_string(), h);
        Ok(())
    }

    pub fn add_outputs(&mut self, dir: &Path, paths: &[PathBuf]) {
        for p in paths {
            let rel = p.strip_prefix(dir).unwrap_or(p);
            self.outputs.push(rel.display().to_string());
        }
    }

    pub fn write(mut self, dir: &Path) -> Result<PathBuf> {
        self.finished_unix = now_unix();
        self.outputs.sort();
        self.outputs.dedup();
        let path = dir.join(FILE_NAME);
        psynet::io::write_json(&path, &self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
