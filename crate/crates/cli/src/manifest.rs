use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qilab::QuadratureSpec;

use crate::args::Command;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CSV_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub params: Command,
    pub version: String,
    pub timestamp: DateTime<Utc>,
    pub quadrature: BTreeMap<String, QuadratureSpec>,
    pub csv_schema_version: String,
    pub outputs: Vec<OutputDigest>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Files produced by one command, held in memory until written.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    pub quadrature: BTreeMap<String, QuadratureSpec>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn spec(&mut self, name: &str, spec: QuadratureSpec) {
        self.quadrature.insert(name.to_string(), spec);
    }

    /// Write every file and the manifest into `dir`.
    pub fn write(self, dir: &Path, params: &Command) -> Result<Manifest> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(OutputDigest { file: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        }
        let manifest = Manifest {
            command: params.name().to_string(),
            params: params.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now(),
            quadrature: self.quadrature,
            csv_schema_version: CSV_SCHEMA_VERSION.to_string(),
            outputs,
        };
        let path: PathBuf = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}
