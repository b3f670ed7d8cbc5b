//! JSON provenance record written next to every command's outputs. It holds
//! no timestamps, so identical runs produce identical manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: BTreeMap<&'static str, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// Writes the manifest to `dest` and returns its path.
pub fn write_manifest(command: &str, cfg: &RunConfig, inputs: &[PathBuf], outputs: &[PathBuf], dest: &Path) -> Result<PathBuf> {
    let m = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.train.seed,
        config: cfg.entries(),
        inputs: digests(inputs)?,
        outputs: digests(outputs)?,
    };
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    std::fs::write(dest, text).with_context(|| format!("writing {}", dest.display()))?;
    Ok(dest.to_path_buf())
}

/// `path` with `suffix` appended to its file name, e.g. `balls.tsv.manifest.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}
