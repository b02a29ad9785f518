//! Report documents and flat tables.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cli::config::RunConfig;
use crate::error::{Error, Result};
use crate::planted::RNG_ALGORITHM;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Key of the trailing block excluded from reproducibility comparisons.
pub const METADATA_KEY: &str = "metadata";

/// What a subcommand hands back to the orchestrator.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub window: Value,
    pub invariants_hold: bool,
    pub diagnostics: Vec<String>,
    pub table: Option<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    run: &'a str,
    subcommand: &'a str,
    version: &'a str,
    rng: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    window: &'a Value,
    invariants_hold: bool,
    diagnostics: &'a [String],
    results: &'a Value,
}

#[derive(Serialize)]
struct Metadata {
    timestamp_unix: u64,
}

/// SHA-256 of the resolved config's canonical JSON.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let canon = serde_json::to_vec(&serde_json::to_value(cfg).map_err(json_err)?).map_err(json_err)?;
    Ok(hex::encode(Sha256::digest(&canon)))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(json_err)
}

/// The report text, with the metadata block last.
pub fn render(run: &str, subcommand: &str, cfg: &RunConfig, out: &Outcome) -> Result<String> {
    let body = Body {
        run,
        subcommand,
        version: VERSION,
        rng: RNG_ALGORITHM,
        config_hash: config_hash(cfg)?,
        config: cfg,
        window: &out.window,
        invariants_hold: out.invariants_hold,
        diagnostics: &out.diagnostics,
        results: &out.results,
    };
    let mut text = serde_json::to_string_pretty(&body).map_err(json_err)?;
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = serde_json::to_string(&Metadata { timestamp_unix: ts }).map_err(json_err)?;
    let body_end = text.trim_end().trim_end_matches('}').trim_end().len();
    text.truncate(body_end);
    text.push_str(&format!(",\n  \"{METADATA_KEY}\": {meta}\n}}\n"));
    Ok(text)
}

/// Report text up to the metadata block.
pub fn strip_metadata(text: &str) -> &str {
    match text.rfind(&format!("\n  \"{METADATA_KEY}\": ")) {
        Some(i) => &text[..i],
        None => text,
    }
}

/// Comma-separated rendering with a header row in field order.
pub fn csv_of<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub struct Written {
    pub report: PathBuf,
    pub table: Option<PathBuf>,
}

pub fn write(dir: &Path, run: &str, report: &str, table: Option<&str>) -> Result<Written> {
    std::fs::create_dir_all(dir)?;
    let report_path = dir.join(format!("report.{run}.json"));
    std::fs::write(&report_path, report)?;
    let table_path = match table {
        Some(t) => {
            let p = dir.join(format!("table.{run}.csv"));
            std::fs::write(&p, t)?;
            Some(p)
        }
        None => None,
    };
    Ok(Written {
        report: report_path,
        table: table_path,
    })
}
