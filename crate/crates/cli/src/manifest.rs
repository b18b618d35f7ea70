//! Run manifests: every command that writes outputs also records the fully
//! resolved configuration, seed, and input hashes next to them, so a run can
//! be audited and replayed.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_snapshot: serde_json::Value,
    pub seed: u64,
    pub input_hashes: BTreeMap<String, String>,
    pub tool_version: String,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_snapshot: serde_json::Value,
        seed: u64,
        inputs: &[&Path],
    ) -> anyhow::Result<RunManifest> {
        let mut input_hashes = BTreeMap::new();
        for path in inputs {
            input_hashes.insert(path.display().to_string(), sha256_hex(path)?);
        }
        Ok(RunManifest {
            command: command.to_string(),
            config_snapshot,
            seed,
            input_hashes,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: chrono::Utc::now().to_rfc3339(),
        })
    }

    /// Write `manifest.json` into `out_dir`, replacing any previous run's
    /// manifest so the directory always holds exactly one.
    pub fn write(&self, out_dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating {}", out_dir.display()))?;
        let path = out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn sha256_hex(path: &Path) -> anyhow::Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing input {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// The directory a manifest for `out_file` belongs in: the file's parent.
pub fn out_dir_of(out_file: &Path) -> &Path {
    let parent = out_file.parent().unwrap_or(Path::new("."));
    if parent.as_os_str().is_empty() {
        Path::new(".")
    } else {
        parent
    }
}
