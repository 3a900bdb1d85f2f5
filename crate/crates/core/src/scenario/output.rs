use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ScenarioConfig;
use crate::error::Result;
use crate::spacetime::FourVector;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the resolved config as serialized below.
    pub config_sha256: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<FileRecord>,
    pub config: ScenarioConfig,
}

pub(crate) fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One CSV line: labels verbatim, then scalars and a four-vector with 17
/// significant digits.
pub(crate) fn csv_row(labels: &[String], scalars: &[f64], x: &FourVector) -> String {
    let mut fields: Vec<String> = labels.to_vec();
    fields.extend(scalars.iter().chain(x.0.iter()).map(|v| format!("{v:.16e}")));
    let mut line = fields.join(",");
    line.push('\n');
    line
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

/// Output files held in memory until the run has finished.
#[derive(Default)]
pub(crate) struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Writes every file and then the manifest listing them.
    pub fn write(self, config: &ScenarioConfig, started_unix: u64) -> Result<RunManifest> {
        let dir = &config.output_dir;
        fs::create_dir_all(dir)?;
        let mut records = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            write_atomic(dir, name, bytes)?;
            records.push(FileRecord {
                name: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(&serde_json::to_vec(config)?),
            seed: config.seed,
            started_unix,
            finished_unix: unix_time(),
            files: records,
            config: config.clone(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(dir, MANIFEST, &bytes)?;
        Ok(manifest)
    }
}
