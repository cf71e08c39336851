//! Self-describing experiment reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    /// SHA-256 of the configuration text, or of the command line when the
    /// command takes no configuration file.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub version: String,
    pub tolerances: BTreeMap<String, f64>,
    pub payload: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct ReportBuilder {
    command: Vec<String>,
    config: String,
    seed: Option<u64>,
    tolerances: BTreeMap<String, f64>,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(command: Vec<String>) -> Self {
        let config = command.join(" ");
        ReportBuilder { command, config, seed: None, tolerances: BTreeMap::new(), start: Instant::now() }
    }

    pub fn config_text(&mut self, text: &str) {
        self.config = text.to_string();
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn finish(self, payload: Value) -> Report {
        Report {
            command: self.command,
            config_hash: sha256_hex(self.config.as_bytes()),
            seed: self.seed,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: self.tolerances,
            payload,
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Writes `<dir>/<name>.json`.
    pub fn write(&self, dir: &Path, name: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{name}.json")), self.to_json())?;
        Ok(())
    }
}

/// Writes `<dir>/<name>.csv` from a header and rows.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
