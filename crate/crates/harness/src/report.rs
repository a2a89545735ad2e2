//! Result files: `results.csv`, `results.json` and `manifest.json`.
//!
//! Nothing time- or host-dependent is written, so equal inputs give
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{ResultRow, ResultTable};

pub const CSV_NAME: &str = "results.csv";
pub const JSON_NAME: &str = "results.json";
pub const MANIFEST_NAME: &str = "manifest.json";
const MAX_LOGGED_FAILURES: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub manifest: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// One CSV row per table cell.
pub fn results_csv(table: &ResultTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

#[derive(Serialize)]
struct MethodBlock<'a> {
    label: &'a str,
    rows: Vec<CellOut>,
}

#[derive(Serialize)]
struct CellOut {
    sweep_value: f64,
    mean_nmse: f64,
    std_nmse: f64,
    trials: usize,
    failures: usize,
}

/// Results nested by method, with the configuration echoed in full.
pub fn results_json(table: &ResultTable, cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let methods: Vec<MethodBlock> = table
        .methods
        .iter()
        .map(|label| MethodBlock {
            label,
            rows: table
                .rows
                .iter()
                .filter(|r| &r.method == label)
                .map(|r| CellOut {
                    sweep_value: r.sweep_value,
                    mean_nmse: r.mean_nmse,
                    std_nmse: r.std_nmse,
                    trials: r.trials,
                    failures: r.failures,
                })
                .collect(),
        })
        .collect();
    let doc = json!({
        "name": cfg.name,
        "seed": cfg.seed,
        "sweep_axis": table.axis.to_string(),
        "methods": methods,
        "failures": {
            "total": table.total_failures(),
            "log": table.failure_log.iter().take(MAX_LOGGED_FAILURES).collect::<Vec<_>>(),
        },
        "config": cfg,
    });
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the CSV, the JSON and a manifest of their digests into `dir`.
pub fn write_report(table: &ResultTable, cfg: &ExperimentConfig, dir: impl AsRef<Path>) -> Result<ReportFiles> {
    if table.rows.is_empty() {
        return Err(HarnessError::config("result table is empty"));
    }
    let dir = dir.as_ref();
    let csv_bytes = results_csv(table)?;
    let json_bytes = results_json(table, cfg)?;
    let files = ReportFiles { csv: dir.join(CSV_NAME), json: dir.join(JSON_NAME), manifest: dir.join(MANIFEST_NAME) };
    write_file(&files.csv, &csv_bytes)?;
    write_file(&files.json, &json_bytes)?;
    let manifest = manifest_json(cfg, &[(CSV_NAME, &csv_bytes), (JSON_NAME, &json_bytes)])?;
    write_file(&files.manifest, &manifest)?;
    Ok(files)
}

/// Tool version, configuration digest and a digest per output file.
pub fn manifest_json(cfg: &ExperimentConfig, files: &[(&str, &[u8])]) -> Result<Vec<u8>> {
    let entries: Vec<_> = files
        .iter()
        .map(|(name, bytes)| json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes) }))
        .collect();
    let doc = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(cfg.to_toml_string().as_bytes()),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "files": entries,
    });
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}
