//! Parsing, validation, and indexing of raw EE-MRIO tables into canonical
//! in-memory snapshots, plus region aggregation of flow matrices.

mod canonical;
mod exiobase;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::footprint::RegionFlowMatrix;
use crate::matrix::Matrix;
use crate::schema::{AggregationMap, RegionSchema};

pub use canonical::{render_canonical, write_canonical};
pub use exiobase::{DEFAULT_EMISSION_ACCOUNTS, DEFAULT_VALUE_ACCOUNTS};

/// Supported on-disk layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MrioFormat {
    /// This artifact's CSV workspace: `index.csv`, `Z_<year>.csv`,
    /// `Y_<year>.csv`, `ext_<year>.csv`, optional `x_<year>.csv`.
    CanonicalCsv,
    /// ExioBase industry-by-industry tab-separated layout (`Z.txt`, `Y.txt`,
    /// `satellite/F.txt`, optional `x.txt`).
    ExiobaseIxi,
}

impl fmt::Display for MrioFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MrioFormat::CanonicalCsv => "canonical_csv",
            MrioFormat::ExiobaseIxi => "exiobase_ixi",
        })
    }
}

impl FromStr for MrioFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical_csv" => Ok(MrioFormat::CanonicalCsv),
            "exiobase_ixi" => Ok(MrioFormat::ExiobaseIxi),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

/// Which extension rows feed the emission and value accounts.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Extension row names summed into `ext_emission`.
    pub emission_accounts: Vec<String>,
    /// Extension row names summed into `ext_value`.
    pub value_accounts: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            emission_accounts: vec!["emission".to_string()],
            value_accounts: vec!["value_added".to_string()],
        }
    }
}

impl ParseOptions {
    /// Account names conventional for each layout: the canonical workspace
    /// uses `emission`/`value_added` rows, ExioBase satellite accounts use
    /// the CO2 combustion stressor and the nine factor-input rows.
    pub fn defaults_for(format: MrioFormat) -> Self {
        match format {
            MrioFormat::CanonicalCsv => ParseOptions::default(),
            MrioFormat::ExiobaseIxi => ParseOptions {
                emission_accounts: DEFAULT_EMISSION_ACCOUNTS
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                value_accounts: DEFAULT_VALUE_ACCOUNTS
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            },
        }
    }
}

/// One year of transactions, final demand, output, and extension vectors.
/// Immutable after construction; safe to share across per-year pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct MrioSnapshot {
    pub year: u16,
    /// Inter-industry transactions, n×n, M.EUR.
    pub z: Matrix,
    /// Final demand aggregated per destination region, n×m, M.EUR.
    pub y: Matrix,
    /// Total output, length n, M.EUR.
    pub x: Vec<f64>,
    /// Direct sectoral emissions, length n, Mt CO2e.
    pub ext_emission: Vec<f64>,
    /// Sectoral value added, length n, M.EUR (may be negative).
    pub ext_value: Vec<f64>,
    pub schema: RegionSchema,
}

impl MrioSnapshot {
    pub fn new(
        year: u16,
        z: Matrix,
        y: Matrix,
        x: Vec<f64>,
        ext_emission: Vec<f64>,
        ext_value: Vec<f64>,
        schema: RegionSchema,
    ) -> Result<Self> {
        if !(1995..=2022).contains(&year) {
            return Err(Error::YearOutOfRange { year });
        }
        let n = schema.flat_size();
        let m = schema.region_count();
        for (name, rows, cols) in [("Z", z.rows(), z.cols()), ("Y", y.rows(), y.cols())] {
            let want_cols = if name == "Z" { n } else { m };
            if rows != n {
                return Err(Error::DimensionMismatch {
                    context: format!("{name} rows vs schema"),
                    expected: n,
                    found: rows,
                });
            }
            if cols != want_cols {
                return Err(Error::DimensionMismatch {
                    context: format!("{name} columns vs schema"),
                    expected: want_cols,
                    found: cols,
                });
            }
        }
        for (name, v) in [
            ("x", &x),
            ("ext_emission", &ext_emission),
            ("ext_value", &ext_value),
        ] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: format!("{name} length vs schema"),
                    expected: n,
                    found: v.len(),
                });
            }
        }
        check_nonnegative("Z", z.data())?;
        check_nonnegative("Y", y.data())?;
        check_nonnegative("x", &x)?;
        check_nonnegative("ext_emission", &ext_emission)?;
        Ok(MrioSnapshot {
            year,
            z,
            y,
            x,
            ext_emission,
            ext_value,
            schema,
        })
    }
}

fn check_nonnegative(name: &str, values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 {
            return Err(Error::NegativeValue {
                context: format!("{name}[{i}]"),
                value: v,
            });
        }
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{name}[{i}] is not finite: {v}"
            )));
        }
    }
    Ok(())
}

/// Parses one year from a workspace directory in the given layout. The
/// balance identity is *not* checked here; see [`validate_balance`].
pub fn parse_mrio(
    workspace: &Path,
    year: u16,
    format: MrioFormat,
    opts: &ParseOptions,
) -> Result<MrioSnapshot> {
    match format {
        MrioFormat::CanonicalCsv => canonical::parse(workspace, year, opts),
        MrioFormat::ExiobaseIxi => exiobase::parse(workspace, year, opts),
    }
}

/// One sector whose stored output disagrees with its row sum.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceViolation {
    pub index: usize,
    pub region: String,
    pub sector: String,
    pub x: f64,
    pub row_sum: f64,
    pub relative_gap: f64,
}

/// Balance check result, sorted by descending relative gap.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<BalanceViolation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `|x_i − (Σ_j Z_ij + Σ_s Y_is)| ≤ epsilon_rel · max(1, x_i)` for
/// every sector and reports the violations, largest relative gap first.
pub fn validate_balance(snapshot: &MrioSnapshot, epsilon_rel: f64) -> ValidationReport {
    let z_sums = snapshot.z.row_sums();
    let y_sums = snapshot.y.row_sums();
    let mut violations = Vec::new();
    for i in 0..snapshot.schema.flat_size() {
        let row_sum = z_sums[i] + y_sums[i];
        let xi = snapshot.x[i];
        let relative_gap = (xi - row_sum).abs() / xi.max(1.0);
        if relative_gap > epsilon_rel {
            let r = snapshot.schema.region_of(i);
            let k = i % snapshot.schema.sector_count();
            violations.push(BalanceViolation {
                index: i,
                region: snapshot.schema.regions()[r].clone(),
                sector: snapshot.schema.sectors()[k].clone(),
                x: xi,
                row_sum,
                relative_gap,
            });
        }
    }
    violations.sort_by(|a, b| {
        b.relative_gap
            .partial_cmp(&a.relative_gap)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    ValidationReport { violations }
}

/// Sums a region-level flow matrix into the aggregated scheme:
/// `out(R,S) = Σ {flow(r,s) : map(r)=R, map(s)=S}`. The total is preserved.
pub fn aggregate_flows(flow: &RegionFlowMatrix, map: &AggregationMap) -> Result<RegionFlowMatrix> {
    let order = map.aggregated_order();
    let mut target_of = Vec::with_capacity(flow.labels.len());
    for label in &flow.labels {
        let agg = map.target(label)?;
        let idx = order
            .iter()
            .position(|o| o == agg)
            .expect("map targets are in aggregated_order");
        target_of.push(idx);
    }
    let m = order.len();
    let mut out = Matrix::zeros(m, m);
    for (r, &tr) in target_of.iter().enumerate() {
        for (s, &ts) in target_of.iter().enumerate() {
            out[(tr, ts)] += flow.get(r, s);
        }
    }
    RegionFlowMatrix::new(flow.kind, flow.timeframe.clone(), order.to_vec(), out)
}
