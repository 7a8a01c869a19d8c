//! Per-stage machine-readable reports, written as JSON next to the data
//! outputs. Reports carry wall-clock timings and are therefore excluded
//! from the pipeline manifest.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use mrionet::ingest::BalanceViolation;

#[derive(Debug, Serialize)]
pub struct IngestYearReport {
    pub year: u16,
    pub balance_violations: Vec<BalanceViolation>,
    pub zero_output_sectors: usize,
    pub cache_hit: bool,
}

#[derive(Debug, Serialize)]
pub struct FootprintYearReport {
    pub year: u16,
    pub zero_output_sectors: usize,
    pub balance_violations: usize,
    pub emission_intensity_dropped: usize,
    pub value_intensity_dropped: usize,
    /// Reciprocal-condition estimate of the Leontief system.
    pub rcond: f64,
    pub cache_hit: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct NetworkReport {
    pub kind: String,
    pub timeframe: String,
    pub nodes: usize,
    pub edges: usize,
    pub pagerank_converged: bool,
    pub pagerank_iterations: usize,
    pub pagerank_residual: f64,
    pub cache_hit: bool,
}

#[derive(Debug, Serialize)]
pub struct StageReport<T: Serialize> {
    pub stage: String,
    pub wall_ms: f64,
    pub entries: Vec<T>,
    /// Free-form notices (period-mode ambiguity, dropped intensities, ...).
    pub notes: Vec<String>,
}

impl<T: Serialize> StageReport<T> {
    pub fn new(stage: &str) -> Self {
        StageReport {
            stage: stage.to_string(),
            wall_ms: 0.0,
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn write(&self, out_root: &Path) -> Result<()> {
        let dir = out_root.join("reports");
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.json", self.stage));
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
