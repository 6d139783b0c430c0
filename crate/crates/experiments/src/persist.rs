//! CSV tables, full JSON results and run manifests.
//!
//! A sweep named `stem` in `dir` produces `stem.csv` (one row per point),
//! `stem.json` (every point with its protocol, enough to replay) and
//! `stem.manifest.json`. Nothing written depends on the clock, so reruns
//! with the same seed produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sweep::{SweepPoint, SweepResult};
use crate::Result;

/// Bumped whenever [`sweep_header`] changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub csv_schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(kind: &str, seed: u64, config: serde_json::Value) -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            csv_schema_version: CSV_SCHEMA_VERSION,
            kind: kind.to_string(),
            seed,
            config,
            files: Vec::new(),
        }
    }
}

pub fn sweep_header(result: &SweepResult) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    h.extend(result.kind.axes().iter().map(|s| s.to_string()));
    for s in ["rho1", "rho2", "eta1", "eta2"] {
        h.extend(["x", "y", "z"].iter().map(|c| format!("{s}_{c}")));
    }
    h.extend(
        [
            "p1",
            "kt",
            "feasibility",
            "witness",
            "single_step_work",
            "optimized_work",
            "clausius",
            "final_bound",
            "protocol_steps",
            "evaluations",
        ]
        .map(String::from),
    );
    h
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn sweep_row(p: &SweepPoint) -> Vec<String> {
    let mut row = vec![p.index.to_string()];
    row.extend(p.coords.iter().copied().map(num));
    let t = &p.task;
    for s in [t.rho1(), t.rho2(), t.eta1(), t.eta2()] {
        row.extend(s.bloch().as_array().map(num));
    }
    row.extend([
        num(t.p1()),
        num(t.kt()),
        p.feasibility.clone(),
        opt(p.witness),
        opt(p.single_step_work),
        opt(p.optimized_work),
        num(p.clausius),
        opt(p.final_bound),
        p.protocol.as_ref().map(|q| q.n_steps().to_string()).unwrap_or_default(),
        p.evaluations.to_string(),
    ]);
    row
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sweep_header(result))?;
    for p in &result.points {
        w.write_record(sweep_row(p))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV, the full JSON result and the manifest; returns the
/// manifest path.
pub fn save_sweep(result: &SweepResult, dir: &Path, stem: &str, mut manifest: Manifest) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_sweep_csv(result, fs::File::create(&csv_path)?)?;
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(result)?)?;
    manifest.files = vec![file_name(&csv_path), file_name(&json_path)];
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest_path)
}

pub fn load_sweep(path: &Path) -> Result<SweepResult> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes any serializable result as `stem.json` plus its manifest.
pub fn save_json<T: Serialize>(value: &T, dir: &Path, stem: &str, mut manifest: Manifest) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(value)?)?;
    manifest.files = vec![file_name(&json_path)];
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest_path)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
