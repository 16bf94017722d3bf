//! Per-run provenance: each command appends one JSON line to `runs.log` in its
//! output directory.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const RUN_LOG: &str = "runs.log";

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

#[derive(Serialize)]
struct Entry<'a, F: Serialize> {
    command: &'a str,
    flags: &'a F,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn digests(paths: &[PathBuf]) -> std::io::Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), file_digest(p)?)))
        .collect()
}

pub fn append<F: Serialize>(
    dir: &Path,
    command: &str,
    flags: &F,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> std::io::Result<()> {
    let entry = Entry {
        command,
        flags,
        inputs: digests(inputs)?,
        outputs: digests(outputs)?,
    };
    let mut line = serde_json::to_string(&entry)?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join(RUN_LOG))?;
    f.write_all(line.as_bytes())
}
