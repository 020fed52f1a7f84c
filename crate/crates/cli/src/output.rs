use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Content hash of a blob the way git computes it, with SHA-256.
pub fn git_blob_hash(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", data.len()).as_bytes());
    h.update(data);
    hex(&h.finalize())
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(v: &T) -> Vec<u8> {
    // Value maps are BTreeMaps, so a round trip sorts every object
    let value: Value = serde_json::to_value(v).expect("serializable");
    let mut out = serde_json::to_vec_pretty(&value).expect("serializable");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// Writes into a directory through temp files and keeps a record of every
/// artifact for the manifest.
pub struct OutDir {
    root: PathBuf,
    pub records: Vec<OutputRecord>,
}

impl OutDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir { root: root.to_path_buf(), records: Vec::new() })
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> std::io::Result<()> {
        write_atomic(&self.root.join(name), data)?;
        self.records.retain(|r| r.path != name);
        self.records.push(OutputRecord { path: name.to_string(), sha256: sha256_hex(data) });
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_source: String,
    /// `sha256:<hex>` of the config bytes, hashed as a git blob.
    pub config_hash: String,
    pub seed: u64,
    pub versions: Versions,
    pub outputs: Vec<OutputRecord>,
    pub status: String,
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub wavetrace: String,
    pub wavetrace_cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions { wavetrace: wavetrace::VERSION.to_string(), wavetrace_cli: env!("CARGO_PKG_VERSION").to_string() }
    }
}
