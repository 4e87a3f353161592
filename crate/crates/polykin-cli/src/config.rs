//! Flat `key = value` configuration files with dotted sections one level
//! deep (`gas.delta = 2`). Chosen over a nested format so that resolved
//! configs diff cleanly in fixtures.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use polykin::{GasParams, MicroState};

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if !valid_key(key) {
                return Err(CliError::Config(format!(
                    "line {}: invalid key `{key}` (one dotted section at most)",
                    lineno + 1
                )));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key} = {v} is not a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key} = {v} is not an integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key} = {v} is not an integer"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.entries
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key {key}")))?
            .parse()
            .map_err(|_| CliError::Config(format!("{key} is not a number")))
    }

    /// Comma-separated list of reals; an absent key yields the default.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("{key}: `{item}` is not a number")))
                })
                .collect(),
        }
    }

    /// Gas parameters from the `gas.*` section (Maxwell-gas defaults).
    pub fn gas_params(&self) -> Result<GasParams, CliError> {
        GasParams::new(
            self.f64_or("gas.delta", 2.0)?,
            self.f64_or("gas.alpha", 0.0)?,
            self.f64_or("gas.c_b", 1.0)?,
            self.f64_or("gas.beta", 8.0)?,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Quadrature grid from the `grid.*` section (production defaults).
    pub fn phase_grid(&self) -> Result<std::sync::Arc<polykin::quadrature::PhaseGrid>, CliError> {
        polykin::quadrature::PhaseGrid::new(
            self.f64_or("grid.v_max", 12.0)?,
            self.f64_or("grid.i_max", 40.0)?,
            self.usize_or("grid.n_v", 48)?,
            self.usize_or("grid.n_i", 64)?,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// The `(speed, I)` scan states from `scan.speeds` × `scan.energies`,
    /// with velocities along the x-axis.
    pub fn scan_states(&self) -> Result<Vec<MicroState>, CliError> {
        let speeds = self.list_or("scan.speeds", &[0.0, 2.0, 4.0, 6.0, 8.0])?;
        let energies = self.list_or("scan.energies", &[0.0, 1.0, 4.0, 16.0])?;
        let mut out = Vec::with_capacity(speeds.len() * energies.len());
        for &s in &speeds {
            for &i in &energies {
                if s < 0.0 || i < 0.0 {
                    return Err(CliError::Config(
                        "scan speeds and energies must be nonnegative".into(),
                    ));
                }
                out.push(MicroState::from_parts(s, 0.0, 0.0, i));
            }
        }
        Ok(out)
    }

    /// Render in the canonical flat form (sorted keys), suitable for replay.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

fn valid_key(key: &str) -> bool {
    let part_ok = |p: &str| {
        !p.is_empty()
            && p.chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            && p.starts_with(|c: char| c.is_ascii_lowercase() || c == '_')
    };
    let mut parts = key.split('.');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), None, _) => part_ok(a),
        (Some(a), Some(b), None) => part_ok(a) && part_ok(b),
        _ => false,
    }
}
