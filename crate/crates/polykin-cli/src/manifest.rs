//! Run manifests: every command records what it ran, with which resolved
//! configuration and seed, so any output can be reproduced. The companion
//! `resolved.cfg` is the exact flat config (seed folded in) whose replay
//! regenerates the data outputs bit for bit; the manifest itself carries
//! wall-clock timestamps and is therefore not byte-stable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
}

pub struct ManifestWriter {
    command: String,
    started: chrono::DateTime<chrono::Utc>,
}

impl ManifestWriter {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: chrono::Utc::now(),
        }
    }

    /// Write `manifest.json` and the replayable `resolved.cfg`.
    pub fn finish(self, out_dir: &Path, config: &Config, seed: u64) -> Result<(), CliError> {
        let mut resolved = config.clone();
        resolved.set("seed", seed.to_string());
        std::fs::write(out_dir.join("resolved.cfg"), resolved.render())
            .map_err(|e| CliError::Io(format!("writing resolved.cfg: {e}")))?;

        let manifest = RunManifest {
            command: self.command,
            config: resolved.entries().clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: self.started.to_rfc3339(),
            finished: chrono::Utc::now().to_rfc3339(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("serializing manifest: {e}")))?;
        std::fs::write(out_dir.join("manifest.json"), json)
            .map_err(|e| CliError::Io(format!("writing manifest.json: {e}")))?;
        Ok(())
    }
}

/// Fixed-width decimal with 12 significant digits, locale independent.
pub fn fmt_g12(x: f64) -> String {
    format!("{x:.11e}")
}
