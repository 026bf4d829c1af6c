//! Run manifest written next to every CSV output.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use celldim::sweep::SweepRow;

#[derive(Serialize)]
struct PointRuntime<'a> {
    series: &'a str,
    axis_value: f64,
    mode: &'a str,
    runtime_s: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command_line: Vec<String>,
    config_sha256: String,
    seed: u64,
    version: &'static str,
    timestamp_unix: u64,
    points: Vec<PointRuntime<'a>>,
}

pub fn path_for(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write(out: &Path, config: &str, seed: u64, rows: &[SweepRow]) -> Result<()> {
    let m = Manifest {
        command_line: std::env::args().collect(),
        config_sha256: Sha256::digest(config.as_bytes()).iter().map(|b| format!("{b:02x}")).collect(),
        seed,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        points: rows
            .iter()
            .map(|r| PointRuntime {
                series: &r.series,
                axis_value: r.axis_value,
                mode: r.mode.as_str(),
                runtime_s: r.runtime_s,
            })
            .collect(),
    };
    let path = path_for(out);
    std::fs::write(&path, serde_json::to_string_pretty(&m)?).with_context(|| format!("writing {}", path.display()))
}
