pub mod direction;
pub mod generate;
pub mod geometry;
pub mod surface;
pub mod validate;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use ghlab_core::config::{load_config, Format};
use ghlab_core::potential::check_criterion;
use ghlab_core::PunctureConfig;
use serde::Serialize;

use crate::manifest::RunManifest;

/// A rendered report plus the reason the run failed, if it did. A report is
/// still emitted on failure so the offending rows can be inspected.
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input, unwritable output.
    Usage(String),
    /// The computation itself refused or failed.
    Math(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Math(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Math(m) => m,
        }
    }
}

pub fn math(e: ghlab_core::Error) -> Failure {
    Failure::Math(e.to_string())
}

pub fn load(path: &Path) -> Result<PunctureConfig, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    load_config(file, Format::Json).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Loads the configuration and insists that it passes the summability criterion.
pub fn load_accepted(path: &Path) -> Result<PunctureConfig, Failure> {
    let config = load(path)?;
    let verdict = check_criterion(&config);
    if !verdict.accepted {
        let reason = serde_json::to_string(&verdict.reason).unwrap_or_default();
        return Err(Failure::Math(format!("configuration rejected: {reason}")));
    }
    Ok(config)
}

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    #[serde(flatten)]
    pub body: T,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// CSV with the manifest as a leading `#` comment line.
pub fn to_csv<T: Serialize>(manifest: &RunManifest, rows: &[T]) -> Result<String, Failure> {
    let mut buf = format!(
        "# manifest {}\n",
        serde_json::to_string(manifest).expect("manifest serializes")
    );
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    buf.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(buf)
}

pub fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    let result = match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush())
        }
    };
    result.map_err(|e| Failure::Usage(format!("writing report: {e}")))
}
