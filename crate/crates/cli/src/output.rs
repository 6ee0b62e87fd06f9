use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use windfreq::engine::ScenarioConfig;

/// Writes through a temporary file in the target directory, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    // Temp files are created owner-only; outputs should read like normal files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub scenario: String,
    pub controller: String,
    /// sha256 of the resolved config serialized as JSON.
    pub config_sha256: String,
    pub outputs: ManifestPaths,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ManifestPaths {
    pub timeseries: PathBuf,
    pub metrics: PathBuf,
}

pub fn config_digest(cfg: &ScenarioConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serialises");
    hex::encode(Sha256::digest(&json))
}

impl RunManifest {
    pub fn new(cfg: &ScenarioConfig, timeseries: PathBuf, metrics: PathBuf) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            scenario: cfg.name.clone(),
            controller: cfg.controller.mode.label(),
            config_sha256: config_digest(cfg),
            outputs: ManifestPaths { timeseries, metrics },
            warnings: cfg.warnings(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}
