//! In-memory output bundles, CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A CSV table built row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, table: &Table) -> Result<Self> {
        Ok(OutputFile {
            name: name.into(),
            bytes: table.to_csv()?,
        })
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(OutputFile {
            name: name.into(),
            bytes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u64,
    pub toolkit_version: String,
    pub kind: String,
    pub master_seed: u64,
    pub replications: usize,
    pub workers: usize,
    /// SHA-256 of the config, excluding fields that cannot change the data.
    pub config_digest: String,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Write every file into `dir`, then the manifest built from their digests.
/// On any failure the files written so far are removed again.
pub fn write_bundle(
    dir: &Path,
    files: &[OutputFile],
    manifest: impl FnOnce(Vec<FileEntry>) -> RunManifest,
) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        let mut entries = Vec::with_capacity(files.len());
        for f in files {
            if f.name == MANIFEST_NAME || f.name.contains(['/', '\\']) {
                return Err(Error::config(format!(
                    "invalid output file name `{}`",
                    f.name
                )));
            }
            let path = dir.join(&f.name);
            written.push(path.clone());
            fs::write(&path, &f.bytes)?;
            entries.push(FileEntry {
                name: f.name.clone(),
                sha256: sha256_hex(&f.bytes),
                bytes: f.bytes.len() as u64,
            });
        }
        let m = manifest(entries);
        let path = dir.join(MANIFEST_NAME);
        written.push(path.clone());
        let out = OutputFile::json(MANIFEST_NAME, &m)?;
        fs::write(&path, out.bytes)?;
        Ok(m)
    })();
    if result.is_err() {
        for p in written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
