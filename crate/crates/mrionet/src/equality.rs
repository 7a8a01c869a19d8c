//! Net emission/value-added flows, min-max scaling, the ecological economic
//! equality index (EEEI), EEEI distance, and quadrant role classification.
//!
//! EEEI combines the two scaled net flows on a [-1, 1] scale. Under the
//! default `advantage_high` orientation the region that maximizes value gain
//! while minimizing emission burden scores +1; `literal_eq8` flips the sign
//! of the inner difference, so its output is the elementwise negation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::{FlowKind, RegionFlowMatrix, Timeframe};
use crate::matrix::Matrix;

/// Sign convention for the inner difference of scaled net flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `d_r = f(v_net)_r − f(e_net)_r`: high score = advantaged.
    #[default]
    AdvantageHigh,
    /// `d_r = f(e_net)_r − f(v_net)_r`, the printed formula; elementwise
    /// negation of `advantage_high`.
    LiteralEq8,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::AdvantageHigh => "advantage_high",
            Orientation::LiteralEq8 => "literal_eq8",
        })
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "advantage_high" => Ok(Orientation::AdvantageHigh),
            "literal_eq8" => Ok(Orientation::LiteralEq8),
            other => Err(Error::InvalidInput(format!(
                "unknown orientation {other:?}"
            ))),
        }
    }
}

/// Trade-role quadrant from the signs of the net flows. Exact zeros resolve
/// to the positive side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    /// Emission exporter with a trade surplus.
    Q1,
    /// Emission importer with a trade surplus.
    Q2,
    /// Emission importer with a trade deficit.
    Q3,
    /// Emission exporter with a trade deficit.
    Q4,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrant::Q1 => "Q1",
            Quadrant::Q2 => "Q2",
            Quadrant::Q3 => "Q3",
            Quadrant::Q4 => "Q4",
        })
    }
}

impl FromStr for Quadrant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q1" => Ok(Quadrant::Q1),
            "Q2" => Ok(Quadrant::Q2),
            "Q3" => Ok(Quadrant::Q3),
            "Q4" => Ok(Quadrant::Q4),
            other => Err(Error::InvalidInput(format!("unknown quadrant {other:?}"))),
        }
    }
}

/// Per-region net flows for one timeframe. Each sums to zero across regions
/// up to floating point, since every bilateral flow appears once with each
/// sign.
#[derive(Debug, Clone)]
pub struct NetFlowVector {
    pub labels: Vec<String>,
    pub timeframe: Timeframe,
    /// Net embodied-emission exports, Mt.
    pub e_net: Vec<f64>,
    /// Net embodied value-added exports, M.EUR.
    pub v_net: Vec<f64>,
}

impl NetFlowVector {
    pub fn from_flows(e_flow: &RegionFlowMatrix, v_flow: &RegionFlowMatrix) -> Result<Self> {
        if e_flow.kind != FlowKind::Emission || v_flow.kind != FlowKind::Value {
            return Err(Error::InvalidInput(
                "net flow vector needs one emission and one value matrix".into(),
            ));
        }
        if e_flow.labels != v_flow.labels {
            return Err(Error::LabelMismatch {
                context: "net flow vector".into(),
                detail: "emission and value matrices carry different region labels".into(),
            });
        }
        if e_flow.timeframe != v_flow.timeframe {
            return Err(Error::LabelMismatch {
                context: "net flow vector".into(),
                detail: format!(
                    "timeframes differ: {} vs {}",
                    e_flow.timeframe, v_flow.timeframe
                ),
            });
        }
        Ok(NetFlowVector {
            labels: e_flow.labels.clone(),
            timeframe: e_flow.timeframe.clone(),
            e_net: net_flows(e_flow),
            v_net: net_flows(v_flow),
        })
    }
}

/// `net_r = Σ_{s≠r} F(r,s) − Σ_{s≠r} F(s,r)`; the domestic diagonal is
/// excluded.
pub fn net_flows(flow: &RegionFlowMatrix) -> Vec<f64> {
    let m = flow.region_count();
    let mut net = Vec::with_capacity(m);
    for r in 0..m {
        let mut exports = 0.0;
        let mut imports = 0.0;
        for s in 0..m {
            if s == r {
                continue;
            }
            exports += flow.get(r, s);
            imports += flow.get(s, r);
        }
        net.push(exports - imports);
    }
    net
}

/// Min-max scaling to [-1, 1]. A constant vector maps to all zeros.
pub fn minmax_scale(v: &[f64]) -> Vec<f64> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !range.is_finite() || range <= 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| 2.0 * (x - min) / range - 1.0).collect()
}

/// EEEI over one timeframe's net flows. Both inputs are min-max scaled
/// across regions, differenced per the orientation, and the difference is
/// scaled again, so exactly one region attains +1 and one -1 whenever the
/// difference has a unique max and min; constant inputs yield all zeros.
pub fn eeei(e_net: &[f64], v_net: &[f64], orientation: Orientation) -> Result<Vec<f64>> {
    if e_net.len() != v_net.len() {
        return Err(Error::DimensionMismatch {
            context: "eeei input lengths".into(),
            expected: e_net.len(),
            found: v_net.len(),
        });
    }
    let scaled_e = minmax_scale(e_net);
    let scaled_v = minmax_scale(v_net);
    let d: Vec<f64> = match orientation {
        Orientation::AdvantageHigh => scaled_v
            .iter()
            .zip(&scaled_e)
            .map(|(v, e)| v - e)
            .collect(),
        Orientation::LiteralEq8 => scaled_e
            .iter()
            .zip(&scaled_v)
            .map(|(e, v)| e - v)
            .collect(),
    };
    Ok(minmax_scale(&d))
}

/// Absolute difference of two EEEI values; a metric on [-1, 1] bounded by 2.
pub fn eeei_distance(a: f64, b: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&a) && (-1.0..=1.0).contains(&b));
    (a - b).abs()
}

/// Quadrant from the net-flow signs; zeros count as positive.
pub fn classify_quadrant(e_net: f64, v_net: f64) -> Quadrant {
    match (e_net >= 0.0, v_net >= 0.0) {
        (true, true) => Quadrant::Q1,
        (false, true) => Quadrant::Q2,
        (false, false) => Quadrant::Q3,
        (true, false) => Quadrant::Q4,
    }
}

/// One region's EEEI row for one timeframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EeeiRecord {
    pub region: String,
    pub timeframe: Timeframe,
    pub e_net: f64,
    pub v_net: f64,
    pub scaled_e: f64,
    pub scaled_v: f64,
    pub eeei: f64,
    pub quadrant: Quadrant,
}

/// Full per-region records for one timeframe's flow pair.
pub fn eeei_records(
    e_flow: &RegionFlowMatrix,
    v_flow: &RegionFlowMatrix,
    orientation: Orientation,
) -> Result<Vec<EeeiRecord>> {
    let net = NetFlowVector::from_flows(e_flow, v_flow)?;
    let scaled_e = minmax_scale(&net.e_net);
    let scaled_v = minmax_scale(&net.v_net);
    let index = eeei(&net.e_net, &net.v_net, orientation)?;
    Ok(net
        .labels
        .iter()
        .enumerate()
        .map(|(r, label)| EeeiRecord {
            region: label.clone(),
            timeframe: net.timeframe.clone(),
            e_net: net.e_net[r],
            v_net: net.v_net[r],
            scaled_e: scaled_e[r],
            scaled_v: scaled_v[r],
            eeei: index[r],
            quadrant: classify_quadrant(net.e_net[r], net.v_net[r]),
        })
        .collect())
}

/// Pairwise |ΔEEEI| matrix over the records of one timeframe.
pub fn distance_matrix(records: &[EeeiRecord]) -> Matrix {
    let m = records.len();
    Matrix::from_fn(m, m, |i, j| eeei_distance(records[i].eeei, records[j].eeei))
}
