//! CSV and JSON sidecar writing.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use randbeam::rates::RateOptions;

/// Schema tag of the long-format result tables.
pub const ROWS_SCHEMA: &str = "randbeam-rows/1";
/// Schema tag of the figure tables.
pub const FIGURE_SCHEMA: &str = "randbeam-figure/1";

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// One number with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub metric: String,
    pub scheme: String,
    pub method: String,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "rho_dB")]
    pub rho_db: Option<f64>,
    pub user_id: Option<u32>,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Serializes records into an in-memory CSV body.
pub fn csv_body<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

/// CSV body from a header and rows of already formatted cells.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("writing to {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn tolerances_json(opts: &RateOptions) -> Value {
    json!({
        "quadrature_rel_tol": opts.quadrature.rel_tol,
        "quadrature_abs_tol": opts.quadrature.abs_tol,
        "max_subdivisions": opts.quadrature.max_subdivisions,
        "precision_tol": opts.precision_tol,
        "prune_threshold": opts.prune_threshold,
    })
}

/// Provenance written next to every CSV.
pub struct Sidecar {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub extra: Value,
    pub tolerances: Value,
    pub rows: usize,
}

impl Sidecar {
    pub fn to_json(&self) -> Value {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({
            "schema": self.schema,
            "command": self.command,
            "version": version_string(),
            "seed": self.seed,
            "tolerances": self.tolerances,
            "rows": self.rows,
            "parameters": self.extra,
            "created_unix": created,
        })
    }
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir` and returns the CSV path.
pub fn write_bundle(dir: &Path, stem: &str, body: &[u8], sidecar: &Sidecar) -> anyhow::Result<PathBuf> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, body)?;
    let mut json = serde_json::to_string_pretty(&sidecar.to_json())?;
    json.push('\n');
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    Ok(csv_path)
}
