//! CSV/JSON serialization of flow matrices, EEEI records, and network
//! metric tables: deterministic column order, RFC-4180 quoting, LF line
//! endings, `.` decimal separator, and a JSON mirror with one object per
//! CSV row under the same field names.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::equality::EeeiRecord;
use crate::error::{Error, Result};
use crate::footprint::{FlowKind, RegionFlowMatrix, Timeframe};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

/// One metrics row per (region, timeframe, kind); the network average row
/// uses region `__network__`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub region: String,
    pub timeframe: Timeframe,
    pub kind: String,
    pub pagerank: f64,
    pub clustering: f64,
}

/// Network-average pseudo-region key in metrics tables.
pub const NETWORK_ROW: &str = "__network__";

/// The result tables this artifact exports.
#[derive(Debug, Clone)]
pub enum ResultTable {
    Flows(RegionFlowMatrix),
    Eeei(Vec<EeeiRecord>),
    Metrics(Vec<MetricRecord>),
}

pub fn write_results(table: &ResultTable, path: &Path, format: OutputFormat) -> Result<()> {
    let bytes = match (table, format) {
        (ResultTable::Flows(flow), OutputFormat::Csv) => flow_csv(flow),
        (ResultTable::Flows(flow), OutputFormat::Json) => flow_json(flow)?,
        (ResultTable::Eeei(records), OutputFormat::Csv) => eeei_csv(records),
        (ResultTable::Eeei(records), OutputFormat::Json) => eeei_json(records)?,
        (ResultTable::Metrics(records), OutputFormat::Csv) => metrics_csv(records),
        (ResultTable::Metrics(records), OutputFormat::Json) => metrics_json(records)?,
    };
    fs::write(path, bytes).map_err(|e| Error::write(path, e))
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Region-labelled square matrix: header row/column of region codes around
/// the numeric body.
pub fn labeled_matrix_csv(labels: &[String], m: &Matrix) -> String {
    let mut out = String::from("region");
    for label in labels {
        out.push(',');
        out.push_str(&csv_field(label));
    }
    out.push('\n');
    for (r, label) in labels.iter().enumerate() {
        out.push_str(&csv_field(label));
        for s in 0..labels.len() {
            let _ = write!(out, ",{}", m[(r, s)]);
        }
        out.push('\n');
    }
    out
}

pub fn flow_csv(flow: &RegionFlowMatrix) -> Vec<u8> {
    labeled_matrix_csv(&flow.labels, &flow.f).into_bytes()
}

fn flow_json(flow: &RegionFlowMatrix) -> Result<Vec<u8>> {
    let mut rows = Vec::with_capacity(flow.labels.len());
    for (r, label) in flow.labels.iter().enumerate() {
        let mut obj = Map::new();
        obj.insert("region".to_string(), json!(label));
        for (s, col) in flow.labels.iter().enumerate() {
            obj.insert(col.clone(), json!(flow.get(r, s)));
        }
        rows.push(Value::Object(obj));
    }
    to_json_bytes(&Value::Array(rows))
}

/// Parses a flow CSV back into a matrix, attaching kind and timeframe from
/// the caller (the filename carries them).
pub fn read_flow_csv(path: &Path, kind: FlowKind, timeframe: Timeframe) -> Result<RegionFlowMatrix> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.into() });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut labels: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if i == 0 {
            labels = record.iter().skip(1).map(str::to_string).collect();
            continue;
        }
        let row_label = record.get(0).unwrap_or_default();
        let expected = labels.get(i - 1).map(String::as_str).unwrap_or_default();
        if row_label != expected {
            return Err(Error::LabelMismatch {
                context: format!("{} row {}", path.display(), i + 1),
                detail: format!("row label {row_label:?} vs column order {expected:?}"),
            });
        }
        if record.len() != labels.len() + 1 {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width", path.display(), i + 1),
                expected: labels.len() + 1,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(labels.len());
        for (j, cell) in record.iter().skip(1).enumerate() {
            row.push(cell.trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
                path: path.into(),
                row: i + 1,
                column: j + 2,
                value: cell.to_string(),
            })?);
        }
        rows.push(row);
    }
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: format!("{} body height", path.display()),
            expected: labels.len(),
            found: rows.len(),
        });
    }
    RegionFlowMatrix::new(kind, timeframe, labels, Matrix::from_rows(rows)?)
}

const EEEI_HEADER: &str = "region,year_or_period,e_net_Mt,v_net_MEUR,scaled_e,scaled_v,eeei,quadrant";

pub fn eeei_csv(records: &[EeeiRecord]) -> Vec<u8> {
    let mut out = String::from(EEEI_HEADER);
    out.push('\n');
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&rec.region),
            rec.timeframe,
            rec.e_net,
            rec.v_net,
            rec.scaled_e,
            rec.scaled_v,
            rec.eeei,
            rec.quadrant
        );
    }
    out.into_bytes()
}

fn eeei_json(records: &[EeeiRecord]) -> Result<Vec<u8>> {
    let rows: Vec<Value> = records
        .iter()
        .map(|rec| {
            json!({
                "region": rec.region,
                "year_or_period": rec.timeframe.to_string(),
                "e_net_Mt": rec.e_net,
                "v_net_MEUR": rec.v_net,
                "scaled_e": rec.scaled_e,
                "scaled_v": rec.scaled_v,
                "eeei": rec.eeei,
                "quadrant": rec.quadrant.to_string(),
            })
        })
        .collect();
    to_json_bytes(&Value::Array(rows))
}

pub fn read_eeei_csv(path: &Path) -> Result<Vec<EeeiRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.into() });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() != 8 {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width", path.display(), i + 2),
                expected: 8,
                found: record.len(),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            record[idx].trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
                path: path.into(),
                row: i + 2,
                column: idx + 1,
                value: record[idx].to_string(),
            })
        };
        records.push(EeeiRecord {
            region: record[0].to_string(),
            timeframe: record[1].parse()?,
            e_net: num(2)?,
            v_net: num(3)?,
            scaled_e: num(4)?,
            scaled_v: num(5)?,
            eeei: num(6)?,
            quadrant: record[7].parse()?,
        });
    }
    Ok(records)
}

const METRICS_HEADER: &str = "region,timeframe,kind,pagerank,clustering";

pub fn metrics_csv(records: &[MetricRecord]) -> Vec<u8> {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&rec.region),
            rec.timeframe,
            rec.kind,
            rec.pagerank,
            rec.clustering
        );
    }
    out.into_bytes()
}

fn metrics_json(records: &[MetricRecord]) -> Result<Vec<u8>> {
    let rows: Vec<Value> = records
        .iter()
        .map(|rec| {
            json!({
                "region": rec.region,
                "timeframe": rec.timeframe.to_string(),
                "kind": rec.kind,
                "pagerank": rec.pagerank,
                "clustering": rec.clustering,
            })
        })
        .collect();
    to_json_bytes(&Value::Array(rows))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.into() });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() != 5 {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width", path.display(), i + 2),
                expected: 5,
                found: record.len(),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            record[idx].trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
                path: path.into(),
                row: i + 2,
                column: idx + 1,
                value: record[idx].to_string(),
            })
        };
        records.push(MetricRecord {
            region: record[0].to_string(),
            timeframe: record[1].parse()?,
            kind: record[2].to_string(),
            pagerank: num(3)?,
            clustering: num(4)?,
        });
    }
    Ok(records)
}

fn to_json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("json serialization: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
