//! Optional TOML configuration file. Command-line flags and environment
//! variables take precedence over anything set here.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use tiui_core::latency::LatencyConfig;

pub const DEFAULT_PORT: u16 = 8470;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub world: Option<PathBuf>,
    pub bind: Option<String>,
    pub port: Option<u16>,
    pub seed: Option<u64>,
    pub static_dir: Option<PathBuf>,
    pub session_file: Option<PathBuf>,
    pub assets: Option<PathBuf>,
    pub latency: Option<LatencyFile>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatencyFile {
    pub mean_ms: Option<f64>,
    pub jitter_ms: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // Paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.world,
            &mut cfg.static_dir,
            &mut cfg.session_file,
            &mut cfg.assets,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Merges flag/env values over the file and built-in defaults.
pub fn latency(mean: Option<f64>, jitter: Option<f64>, seed: u64, file: &FileConfig) -> LatencyConfig {
    let f = file.latency.unwrap_or_default();
    LatencyConfig {
        mean_ms: mean.or(f.mean_ms).unwrap_or(0.0).max(0.0),
        jitter_ms: jitter.or(f.jitter_ms).unwrap_or(0.0).max(0.0),
        seed,
    }
}
