use std::io::Write;
use std::path::Path;

use projclust::{Error, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

/// Everything needed to replay a reported number.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// SHA-256 of the canonical JSON of the effective settings.
    pub config_hash: String,
    /// SHA-256 of the input file bytes, when there is an input file.
    pub input_sha256: Option<String>,
    pub seed: u64,
    /// Method tags of every stage that produced the result, in order.
    pub methods: Vec<String>,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Artifact<T: Serialize> {
    pub schema: u32,
    pub command: &'static str,
    pub settings: Value,
    pub provenance: Provenance,
    pub result: T,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Keys of `serde_json::Value` objects are kept sorted, so this is canonical.
pub fn canonical_hash(settings: &Value) -> String {
    sha256_hex(settings.to_string().as_bytes())
}

pub fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

impl<T: Serialize> Artifact<T> {
    pub fn new(command: &'static str, settings: Value, input: Option<&Path>, seed: u64, methods: Vec<String>, result: T) -> Result<Self> {
        let input_sha256 = input.map(file_hash).transpose()?;
        let provenance = Provenance {
            config_hash: canonical_hash(&settings),
            input_sha256,
            seed,
            methods,
            version: env!("CARGO_PKG_VERSION"),
        };
        Ok(Artifact { schema: SCHEMA, command, settings, provenance, result })
    }

    /// Pretty JSON to `path`, or to stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Reads a JSON file and returns `result.<key>` if it is an artifact, else the whole document.
pub fn load_part(path: &Path, key: &str) -> Result<Value> {
    let v: Value = serde_json::from_slice(&std::fs::read(path)?)?;
    if v.get("schema").is_some() {
        if v["schema"] != SCHEMA {
            return Err(Error::input(format!("{}: unsupported schema {}", path.display(), v["schema"])));
        }
        return v
            .get("result")
            .and_then(|r| r.get(key))
            .cloned()
            .ok_or_else(|| Error::input(format!("{}: artifact has no result.{key}", path.display())));
    }
    Ok(v)
}
