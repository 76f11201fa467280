//! Where command results go: stdout, or a directory of files plus a
//! `manifest.json` describing the run.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    spec_sha256: Option<&'a str>,
    parameters: &'a BTreeMap<String, String>,
    seed: Option<u64>,
    tool_version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<FileEntry>,
}

pub struct Output {
    dir: Option<PathBuf>,
    command: String,
    spec_digest: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    started: u64,
    files: Vec<(String, Vec<u8>)>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Output {
    pub fn new(dir: Option<PathBuf>, command: &str, spec_digest: Option<String>) -> Self {
        Output {
            dir,
            command: command.to_string(),
            spec_digest,
            parameters: BTreeMap::new(),
            seed: None,
            started: now(),
            files: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes every file and the manifest, or prints the files to stdout.
    pub fn finish(self) -> std::io::Result<()> {
        let Some(dir) = &self.dir else {
            let mut out = std::io::stdout().lock();
            let many = self.files.len() > 1;
            for (name, bytes) in &self.files {
                if many {
                    writeln!(out, "# {name}")?;
                }
                out.write_all(bytes)?;
            }
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let mut outputs = Vec::new();
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
            outputs.push(FileEntry { name: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        }
        let manifest = Manifest {
            command: &self.command,
            spec_sha256: self.spec_digest.as_deref(),
            parameters: &self.parameters,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started,
            finished_unix: now(),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)
    }
}
