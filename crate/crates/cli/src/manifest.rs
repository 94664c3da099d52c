use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Record written next to every artifact; `argv` re-runs the command exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, argv: Vec<String>, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            argv,
            config,
            artifacts: Vec::new(),
        }
    }

    pub fn add_artifact(&mut self, path: &Path) {
        self.artifacts.push(path.display().to_string());
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(path, text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

/// `best.json` -> `best.manifest.json`
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
