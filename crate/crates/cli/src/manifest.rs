//! Run manifest: resolved inputs, produced files and their digests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: String,
    pub status: Status,
    /// Notable but non-fatal outcomes, e.g. "no evolution requested".
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Effective configuration after `--set` overrides.
    pub config: Value,
    /// Derived inputs: scaled parameters, grid, stepping, island centre.
    pub resolved: Value,
    pub files: Vec<FileEntry>,
}

/// Collects everything a run writes into one directory.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub resolved: serde_json::Map<String, Value>,
}

impl Outputs {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            flags: Vec::new(),
            warnings: Vec::new(),
            resolved: serde_json::Map::new(),
        })
    }

    /// Writes `name` through a buffered writer and records it.
    pub fn write<F>(&mut self, name: &str, fill: F) -> io::Result<()>
    where
        F: FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
    {
        let path = self.dir.join(name);
        let mut w = io::BufWriter::new(fs::File::create(&path)?);
        fill(&mut w)?;
        io::Write::flush(&mut w)?;
        if !self.files.iter().any(|f| f == Path::new(name)) {
            self.files.push(PathBuf::from(name));
        }
        Ok(())
    }

    pub fn resolve<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("serializable resolved value");
        self.resolved.insert(key.to_string(), v);
    }

    /// Hashes every recorded file and writes the manifest last.
    pub fn finish(self, mode: &str, config: Value, error: Option<String>) -> io::Result<()> {
        let mut files = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let bytes = fs::read(self.dir.join(rel))?;
            files.push(FileEntry {
                path: rel.to_string_lossy().into_owned(),
                sha256: hex::encode(Sha256::digest(&bytes)),
                bytes: bytes.len() as u64,
            });
        }
        let manifest = Manifest {
            tool: "dyntun",
            version: dyntun::VERSION,
            mode: mode.to_string(),
            status: if error.is_some() {
                Status::Incomplete
            } else {
                Status::Complete
            },
            flags: self.flags,
            warnings: self.warnings,
            error,
            config,
            resolved: Value::Object(self.resolved),
            files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST_NAME), text)
    }
}
