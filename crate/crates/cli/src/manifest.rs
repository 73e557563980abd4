use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use ghlab_core::PunctureConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance block embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &PunctureConfig, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash(config),
            seed,
            tolerances: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &PunctureConfig) -> String {
    hex::encode(Sha256::digest(config.to_json_string().as_bytes()))
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set, for reproducible output.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}
