//! Footprint engine: technical coefficients, the Leontief inverse, sectoral
//! intensities, and region-to-region footprint flow matrices per year and
//! per period.
//!
//! The chain for one snapshot is
//!
//! ```text
//! A = Z x̂⁻¹          (zero-output columns zeroed)
//! X = (I − A)⁻¹ Y     (LU factorization applied to the demand block)
//! G = q̂ X             (sector-level footprint, q = direct intensity)
//! F(r,s) = Σ_{i ∈ r} G(i,s)
//! ```
//!
//! `F(r,s)` is the footprint occurring in region `r` attributable to the
//! final demand of region `s`; row sums are production-based totals and
//! column sums consumption-based totals.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::Solve;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MrioSnapshot;
use crate::matrix::Matrix;
use crate::schema::RegionSchema;

/// Default output cutoff below which a sector counts as having no output.
pub const DEFAULT_EPSILON_X: f64 = 1e-9;

/// Default reciprocal-condition threshold for the Leontief solve.
pub const DEFAULT_RCOND_THRESHOLD: f64 = 1e-13;

/// Which extension a flow matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    /// Embodied emissions, Mt CO2e.
    Emission,
    /// Embodied value added, M.EUR.
    Value,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Emission => "emission",
            FlowKind::Value => "value",
        })
    }
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emission" => Ok(FlowKind::Emission),
            "value" => Ok(FlowKind::Value),
            other => Err(Error::InvalidInput(format!("unknown flow kind {other:?}"))),
        }
    }
}

/// How a period combines its member years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodMode {
    #[default]
    Mean,
    Sum,
}

/// A labelled span of consecutive years.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub start_year: u16,
    pub end_year: u16,
    #[serde(default)]
    pub mode: PeriodMode,
}

impl Period {
    pub fn new(label: impl Into<String>, start_year: u16, end_year: u16) -> Result<Self> {
        let label = label.into();
        if start_year > end_year {
            return Err(Error::InvalidInput(format!(
                "period {label}: start year {start_year} is after end year {end_year}"
            )));
        }
        Ok(Period {
            label,
            start_year,
            end_year,
            mode: PeriodMode::Mean,
        })
    }

    pub fn with_mode(mut self, mode: PeriodMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn years(&self) -> impl Iterator<Item = u16> {
        self.start_year..=self.end_year
    }

    /// The four default study periods: P1 1995-2001, P2 2002-2008,
    /// P3 2009-2015, P4 2016-2022.
    pub fn default_periods() -> Vec<Period> {
        vec![
            Period::new("P1", 1995, 2001).unwrap(),
            Period::new("P2", 2002, 2008).unwrap(),
            Period::new("P3", 2009, 2015).unwrap(),
            Period::new("P4", 2016, 2022).unwrap(),
        ]
    }
}

/// A single year or a labelled period.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Timeframe {
    Year(u16),
    Period(String),
}

impl fmt::Display for Timeframe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timeframe::Year(y) => write!(f, "{y}"),
            Timeframe::Period(label) => f.write_str(label),
        }
    }
}

impl FromStr for Timeframe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<u16>() {
            Ok(year) => Ok(Timeframe::Year(year)),
            Err(_) => Ok(Timeframe::Period(s.to_string())),
        }
    }
}

/// Region-to-region footprint flows for one quantity kind over one
/// timeframe. `F(r,s)` is the footprint hosted by region `r` and driven by
/// the final demand of region `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFlowMatrix {
    pub kind: FlowKind,
    pub timeframe: Timeframe,
    pub labels: Vec<String>,
    pub f: Matrix,
}

impl RegionFlowMatrix {
    pub fn new(kind: FlowKind, timeframe: Timeframe, labels: Vec<String>, f: Matrix) -> Result<Self> {
        if f.rows() != labels.len() || f.cols() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "region flow matrix".into(),
                expected: labels.len(),
                found: f.rows().max(f.cols()),
            });
        }
        Ok(RegionFlowMatrix {
            kind,
            timeframe,
            labels,
            f,
        })
    }

    pub fn region_count(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.f[(r, s)]
    }

    /// Row sums: emissions (or value) hosted by each region.
    pub fn production_totals(&self) -> Vec<f64> {
        self.f.row_sums()
    }

    /// Column sums: emissions (or value) driven by each region's demand.
    pub fn consumption_totals(&self) -> Vec<f64> {
        self.f.col_sums()
    }
}

/// Direct requirements matrix together with the columns that were zeroed
/// because the corresponding sector has no output.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub a: Matrix,
    pub zero_output_sectors: BTreeSet<usize>,
}

/// Explicit technology model: direct requirements and the materialized
/// Leontief inverse.
#[derive(Debug, Clone)]
pub struct TechnologyModel {
    pub a: Matrix,
    pub l: Matrix,
    pub zero_output_sectors: BTreeSet<usize>,
}

impl TechnologyModel {
    pub fn build(z: &Matrix, x: &[f64], epsilon_x: f64) -> Result<Self> {
        let coeffs = technical_coefficients(z, x, epsilon_x)?;
        let l = leontief_inverse(&coeffs.a)?;
        Ok(TechnologyModel {
            a: coeffs.a,
            l,
            zero_output_sectors: coeffs.zero_output_sectors,
        })
    }
}

/// Total output from transactions and final demand: `x_i = Σ_j Z_ij + Σ_s Y_is`.
pub fn compute_output(z: &Matrix, y: &Matrix) -> Result<Vec<f64>> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch {
            context: "Z must be square".into(),
            expected: z.rows(),
            found: z.cols(),
        });
    }
    if y.rows() != z.rows() {
        return Err(Error::DimensionMismatch {
            context: "Y rows must match Z".into(),
            expected: z.rows(),
            found: y.rows(),
        });
    }
    Ok(z.row_sums()
        .into_iter()
        .zip(y.row_sums())
        .map(|(zi, yi)| zi + yi)
        .collect())
}

/// Direct requirements `A_ij = Z_ij / x_j`. Columns whose output is at or
/// below `epsilon_x` are zeroed and reported in `zero_output_sectors`.
pub fn technical_coefficients(z: &Matrix, x: &[f64], epsilon_x: f64) -> Result<Coefficients> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch {
            context: "Z must be square".into(),
            expected: z.rows(),
            found: z.cols(),
        });
    }
    if x.len() != z.rows() {
        return Err(Error::DimensionMismatch {
            context: "output vector length".into(),
            expected: z.rows(),
            found: x.len(),
        });
    }
    let n = z.rows();
    let mut zero_output_sectors = BTreeSet::new();
    let mut inv_x = vec![0.0; n];
    for j in 0..n {
        if x[j] > epsilon_x {
            inv_x[j] = 1.0 / x[j];
        } else {
            zero_output_sectors.insert(j);
        }
    }
    let a = Matrix::from_fn(n, n, |i, j| z[(i, j)] * inv_x[j]);
    Ok(Coefficients {
        a,
        zero_output_sectors,
    })
}

/// LU factorization of `(I − A)`, reusable across right-hand sides and
/// extension kinds within one year. Read-only after construction.
pub struct LeontiefFactor {
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    n: usize,
    rcond: f64,
}

impl LeontiefFactor {
    pub fn new(a: &Matrix, rcond_threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "A must be square".into(),
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let ima = faer::Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - a[(i, j)]
        });
        let lu = ima.partial_piv_lu();

        // Reciprocal-condition proxy from the U diagonal: an exactly singular
        // system yields a zero pivot and rcond 0.
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for i in 0..n {
            let p = lu.U()[(i, i)].abs();
            min_pivot = min_pivot.min(p);
            max_pivot = max_pivot.max(p);
        }
        let rcond = if n == 0 || max_pivot == 0.0 {
            0.0
        } else {
            min_pivot / max_pivot
        };
        if !rcond.is_finite() || rcond < rcond_threshold {
            return Err(Error::NearSingular {
                rcond,
                threshold: rcond_threshold,
            });
        }
        Ok(LeontiefFactor { lu, n, rcond })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Reciprocal-condition estimate of `(I − A)` from the pivot ratio.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves `(I − A) X = rhs` for an n×k right-hand side.
    pub fn solve_matrix(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows() != self.n {
            return Err(Error::DimensionMismatch {
                context: "right-hand side rows".into(),
                expected: self.n,
                found: rhs.rows(),
            });
        }
        let x = self.lu.solve(rhs.to_faer());
        Ok(Matrix::from_faer(x.as_ref()))
    }

    /// Materializes the full inverse by solving against the identity.
    pub fn inverse(&self) -> Matrix {
        let x = self.lu.solve(faer::Mat::<f64>::identity(self.n, self.n));
        Matrix::from_faer(x.as_ref())
    }
}

/// Materialized Leontief inverse `L = (I − A)⁻¹`.
pub fn leontief_inverse(a: &Matrix) -> Result<Matrix> {
    Ok(LeontiefFactor::new(a, DEFAULT_RCOND_THRESHOLD)?.inverse())
}

/// Per-unit-output intensity of a direct account, with the count of sectors
/// whose direct value would be dropped because they have no output.
#[derive(Debug, Clone)]
pub struct IntensityResult {
    pub q: Vec<f64>,
    /// Sectors with `x_i <= epsilon_x` but a nonzero direct value; their
    /// intensity is forced to zero and the occurrence is reported.
    pub dropped: usize,
}

pub fn intensity(direct: &[f64], x: &[f64], epsilon_x: f64) -> Result<IntensityResult> {
    if direct.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "intensity vector length".into(),
            expected: x.len(),
            found: direct.len(),
        });
    }
    let mut dropped = 0;
    let q = direct
        .iter()
        .zip(x)
        .map(|(&d, &xi)| {
            if xi > epsilon_x {
                d / xi
            } else {
                if d != 0.0 {
                    dropped += 1;
                }
                0.0
            }
        })
        .collect();
    Ok(IntensityResult { q, dropped })
}

/// Region-level footprint flows from an explicit Leontief inverse:
/// `F(r,s) = Σ_{i ∈ r} q_i (L Y)(i,s)`.
pub fn footprint_flows(
    q: &[f64],
    l: &Matrix,
    y: &Matrix,
    schema: &RegionSchema,
    kind: FlowKind,
    timeframe: Timeframe,
) -> Result<RegionFlowMatrix> {
    let n = schema.flat_size();
    let m = schema.region_count();
    if l.rows() != n || l.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "Leontief inverse order".into(),
            expected: n,
            found: l.rows(),
        });
    }
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            context: "intensity length".into(),
            expected: n,
            found: q.len(),
        });
    }
    if y.rows() != n || y.cols() != m {
        return Err(Error::DimensionMismatch {
            context: "final demand shape".into(),
            expected: n,
            found: y.rows(),
        });
    }
    let x_total = l.matmul(y)?;
    Ok(region_flows_from_sector(q, &x_total, schema, kind, timeframe))
}

/// Collapses sector-level footprints `diag(q)·X` to region resolution.
fn region_flows_from_sector(
    q: &[f64],
    x_total: &Matrix,
    schema: &RegionSchema,
    kind: FlowKind,
    timeframe: Timeframe,
) -> RegionFlowMatrix {
    let m = schema.region_count();
    let mut f = Matrix::zeros(m, m);
    for i in 0..schema.flat_size() {
        let r = schema.region_of(i);
        let qi = q[i];
        if qi == 0.0 {
            continue;
        }
        for s in 0..m {
            f[(r, s)] += qi * x_total[(i, s)];
        }
    }
    RegionFlowMatrix {
        kind,
        timeframe,
        labels: schema.regions().to_vec(),
        f,
    }
}

/// Entrywise mean or sum over the yearly matrices of a period. The inputs
/// must carry the same kind and labels and cover exactly the period's years.
pub fn period_aggregate(flows: &[RegionFlowMatrix], period: &Period) -> Result<RegionFlowMatrix> {
    let expected: Vec<u16> = period.years().collect();
    if flows.is_empty() {
        return Err(Error::MissingYear {
            label: period.label.clone(),
            year: period.start_year,
        });
    }
    let first = &flows[0];
    let mut seen = BTreeSet::new();
    for flow in flows {
        if flow.kind != first.kind {
            return Err(Error::LabelMismatch {
                context: format!("period {}", period.label),
                detail: "mixed flow kinds".into(),
            });
        }
        if flow.labels != first.labels {
            return Err(Error::LabelMismatch {
                context: format!("period {}", period.label),
                detail: "region labels differ across years".into(),
            });
        }
        match flow.timeframe {
            Timeframe::Year(y) if expected.contains(&y) => {
                if !seen.insert(y) {
                    return Err(Error::LabelMismatch {
                        context: format!("period {}", period.label),
                        detail: format!("year {y} supplied twice"),
                    });
                }
            }
            ref tf => {
                return Err(Error::LabelMismatch {
                    context: format!("period {}", period.label),
                    detail: format!("timeframe {tf} is outside the period"),
                });
            }
        }
    }
    for year in &expected {
        if !seen.contains(year) {
            return Err(Error::MissingYear {
                label: period.label.clone(),
                year: *year,
            });
        }
    }

    let m = first.region_count();
    let mut acc = Matrix::zeros(m, m);
    for flow in flows {
        for r in 0..m {
            for s in 0..m {
                acc[(r, s)] += flow.f[(r, s)];
            }
        }
    }
    if period.mode == PeriodMode::Mean {
        let k = flows.len() as f64;
        acc = acc.scale(1.0 / k);
    }
    Ok(RegionFlowMatrix {
        kind: first.kind,
        timeframe: Timeframe::Period(period.label.clone()),
        labels: first.labels.clone(),
        f: acc,
    })
}

/// Solver/coverage statistics for one year's footprint computation.
#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub zero_output_sectors: usize,
    pub emission_intensity_dropped: usize,
    pub value_intensity_dropped: usize,
    pub rcond: f64,
}

/// Emission and value flow matrices for one year, sharing one factorization.
#[derive(Debug, Clone)]
pub struct YearFootprints {
    pub emission: RegionFlowMatrix,
    pub value: RegionFlowMatrix,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy)]
pub struct FootprintOptions {
    pub epsilon_x: f64,
    pub rcond_threshold: f64,
}

impl Default for FootprintOptions {
    fn default() -> Self {
        FootprintOptions {
            epsilon_x: DEFAULT_EPSILON_X,
            rcond_threshold: DEFAULT_RCOND_THRESHOLD,
        }
    }
}

/// Full per-year chain on a snapshot. The factorization is applied to the
/// n×m demand block directly; the explicit inverse is never materialized.
pub fn compute_footprints(
    snapshot: &MrioSnapshot,
    opts: FootprintOptions,
) -> Result<YearFootprints> {
    let coeffs = technical_coefficients(&snapshot.z, &snapshot.x, opts.epsilon_x)?;
    let factor = LeontiefFactor::new(&coeffs.a, opts.rcond_threshold)?;
    let x_total = factor.solve_matrix(&snapshot.y)?;

    let q_e = intensity(&snapshot.ext_emission, &snapshot.x, opts.epsilon_x)?;
    let q_v = intensity(&snapshot.ext_value, &snapshot.x, opts.epsilon_x)?;
    let timeframe = Timeframe::Year(snapshot.year);
    let emission = region_flows_from_sector(
        &q_e.q,
        &x_total,
        &snapshot.schema,
        FlowKind::Emission,
        timeframe.clone(),
    );
    let value = region_flows_from_sector(
        &q_v.q,
        &x_total,
        &snapshot.schema,
        FlowKind::Value,
        timeframe,
    );
    Ok(YearFootprints {
        emission,
        value,
        stats: SolveStats {
            zero_output_sectors: coeffs.zero_output_sectors.len(),
            emission_intensity_dropped: q_e.dropped,
            value_intensity_dropped: q_v.dropped,
            rcond: factor.rcond(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_rs(regions: usize, sectors: usize) -> RegionSchema {
        RegionSchema::new(
            (0..regions).map(|r| format!("R{r}")).collect(),
            (0..sectors).map(|k| format!("s{k}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn output_with_zero_z_is_demand_row_sums() {
        let z = Matrix::zeros(3, 3);
        let y = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(compute_output(&z, &y).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn output_scalar_case() {
        let z = Matrix::from_rows(vec![vec![0.5]]).unwrap();
        let y = Matrix::from_rows(vec![vec![0.5]]).unwrap();
        assert_eq!(compute_output(&z, &y).unwrap(), vec![1.0]);
    }

    #[test]
    fn output_matches_loop_summation() {
        let mut rng = crate::synthetic::Rng64::new(11);
        let z = Matrix::from_fn(6, 6, |_, _| rng.next_f64());
        let y = Matrix::from_fn(6, 3, |_, _| rng.next_f64());
        let x = compute_output(&z, &y).unwrap();
        for i in 0..6 {
            let mut expect = 0.0;
            for j in 0..6 {
                expect += z[(i, j)];
            }
            for s in 0..3 {
                expect += y[(i, s)];
            }
            assert!((x[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficients_zero_column_stays_zero() {
        let z = Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let coeffs = technical_coefficients(&z, &[2.0, 4.0], 1e-9).unwrap();
        assert_eq!(coeffs.a[(0, 0)], 0.0);
        assert_eq!(coeffs.a[(0, 1)], 0.25);
        assert!(coeffs.zero_output_sectors.is_empty());
    }

    #[test]
    fn coefficients_scalar_division() {
        let z = Matrix::from_rows(vec![vec![0.5]]).unwrap();
        let coeffs = technical_coefficients(&z, &[1.0], 1e-9).unwrap();
        assert_eq!(coeffs.a[(0, 0)], 0.5);
    }

    #[test]
    fn zero_output_column_is_zeroed_and_reported() {
        let z = Matrix::from_rows(vec![vec![0.0, 3.0], vec![0.0, 1.0]]).unwrap();
        let coeffs = technical_coefficients(&z, &[5.0, 0.0], 1e-9).unwrap();
        assert_eq!(coeffs.a[(0, 1)], 0.0);
        assert_eq!(coeffs.a[(1, 1)], 0.0);
        assert!(coeffs.zero_output_sectors.contains(&1));
    }

    #[test]
    fn leontief_of_zero_is_identity() {
        let l = leontief_inverse(&Matrix::zeros(4, 4)).unwrap();
        assert!(l.max_abs_diff(&Matrix::identity(4)) < 1e-14);
    }

    #[test]
    fn leontief_scalar_geometric_series() {
        let a = Matrix::from_rows(vec![vec![0.5]]).unwrap();
        let l = leontief_inverse(&a).unwrap();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn leontief_matches_truncated_neumann_series() {
        let mut rng = crate::synthetic::Rng64::new(7);
        let n = 8;
        let raw = Matrix::from_fn(n, n, |_, _| rng.next_f64());
        let rho = raw.spectral_radius(300);
        let a = raw.scale(0.7 / rho);
        let l = leontief_inverse(&a).unwrap();

        let mut series = Matrix::identity(n);
        let mut power = Matrix::identity(n);
        for _ in 1..=60 {
            power = power.matmul(&a).unwrap();
            for i in 0..n {
                for j in 0..n {
                    series[(i, j)] += power[(i, j)];
                }
            }
        }
        assert!(l.max_abs_diff(&series) < 1e-6);
    }

    #[test]
    fn leontief_inverse_is_nonnegative_for_productive_systems() {
        let mut rng = crate::synthetic::Rng64::new(41);
        for trial in 0..10 {
            let n = 12;
            let raw = Matrix::from_fn(n, n, |_, _| rng.next_f64());
            let rho = raw.spectral_radius(300);
            let a = raw.scale(0.8 / rho);
            let l = leontief_inverse(&a).unwrap();
            assert!(l.min() >= -1e-10, "trial {trial}: min {}", l.min());
        }
    }

    #[test]
    fn singular_system_is_reported_not_garbage() {
        // A = I makes (I - A) exactly singular.
        let a = Matrix::identity(3);
        let err = leontief_inverse(&a).unwrap_err();
        assert!(err.is_numerical(), "got {err}");
        assert!(err.to_string().contains("condition"));
    }

    #[test]
    fn intensity_of_direct_equal_to_output_is_one() {
        let x = [2.0, 3.0, 4.0];
        let res = intensity(&x, &x, 1e-9).unwrap();
        assert_eq!(res.q, vec![1.0, 1.0, 1.0]);
        assert_eq!(res.dropped, 0);
    }

    #[test]
    fn intensity_zero_direct_is_zero() {
        let res = intensity(&[0.0, 0.0], &[1.0, 2.0], 1e-9).unwrap();
        assert_eq!(res.q, vec![0.0, 0.0]);
    }

    #[test]
    fn intensity_zero_output_counts_dropped() {
        let res = intensity(&[5.0, 1.0], &[0.0, 2.0], 1e-9).unwrap();
        assert_eq!(res.q, vec![0.0, 0.5]);
        assert_eq!(res.dropped, 1);
    }

    #[test]
    fn footprint_with_identity_leontief_aggregates_demand() {
        // A = 0 so L = I, unit intensities, single region: F = total demand.
        let schema = schema_rs(1, 2);
        let l = Matrix::identity(2);
        let y = Matrix::from_rows(vec![vec![3.0], vec![4.0]]).unwrap();
        let f = footprint_flows(
            &[1.0, 1.0],
            &l,
            &y,
            &schema,
            FlowKind::Emission,
            Timeframe::Year(1995),
        )
        .unwrap();
        assert_eq!(f.get(0, 0), 7.0);
    }

    #[test]
    fn footprint_scalar_chain() {
        let schema = schema_rs(1, 1);
        let l = Matrix::from_rows(vec![vec![2.0]]).unwrap();
        let y = Matrix::from_rows(vec![vec![1.0]]).unwrap();
        let f = footprint_flows(
            &[0.5],
            &l,
            &y,
            &schema,
            FlowKind::Value,
            Timeframe::Year(1995),
        )
        .unwrap();
        assert_eq!(f.get(0, 0), 1.0);
    }

    #[test]
    fn footprint_matches_neumann_loop_oracle() {
        let mut rng = crate::synthetic::Rng64::new(23);
        let schema = schema_rs(3, 2);
        let n = schema.flat_size();
        let m = schema.region_count();

        let raw = Matrix::from_fn(n, n, |_, _| rng.next_f64());
        let rho = raw.spectral_radius(300);
        let a = raw.scale(0.7 / rho);
        let y = Matrix::from_fn(n, m, |_, _| rng.next_f64() * 10.0);
        let q: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();

        let l = leontief_inverse(&a).unwrap();
        let f = footprint_flows(
            &q,
            &l,
            &y,
            &schema,
            FlowKind::Emission,
            Timeframe::Year(2000),
        )
        .unwrap();

        // Brute force: diag(q) * (sum_{k<=60} A^k) * Y, then sum sector rows
        // per region, all in plain loops.
        let mut series = Matrix::identity(n);
        let mut power = Matrix::identity(n);
        for _ in 1..=60 {
            power = power.matmul(&a).unwrap();
            for i in 0..n {
                for j in 0..n {
                    series[(i, j)] += power[(i, j)];
                }
            }
        }
        let mut expect = Matrix::zeros(m, m);
        for i in 0..n {
            for s in 0..m {
                let mut xi = 0.0;
                for j in 0..n {
                    xi += series[(i, j)] * y[(j, s)];
                }
                expect[(schema.region_of(i), s)] += q[i] * xi;
            }
        }
        assert!(f.f.max_abs_diff(&expect) < 1e-6);
    }

    #[test]
    fn leontief_identity_l_equals_i_plus_al() {
        let mut rng = crate::synthetic::Rng64::new(99);
        for &n in &[4usize, 16, 64] {
            let raw = Matrix::from_fn(n, n, |_, _| rng.next_f64());
            let rho = raw.spectral_radius(300);
            let a = raw.scale(0.8 / rho);
            let l = leontief_inverse(&a).unwrap();
            let rhs = a.matmul(&l).unwrap();
            let mut expect = rhs;
            for i in 0..n {
                expect[(i, i)] += 1.0;
            }
            assert!(l.max_abs_diff(&expect) < 1e-8, "n={n}");
        }
    }

    fn flow_of(kind: FlowKind, year: u16, value: f64) -> RegionFlowMatrix {
        RegionFlowMatrix::new(
            kind,
            Timeframe::Year(year),
            vec!["A".into(), "B".into()],
            Matrix::from_fn(2, 2, |_, _| value),
        )
        .unwrap()
    }

    #[test]
    fn period_mean_of_identical_matrices_is_idempotent() {
        let period = Period::new("P1", 1995, 2001).unwrap();
        let flows: Vec<_> = (1995..=2001)
            .map(|y| flow_of(FlowKind::Emission, y, 5.0))
            .collect();
        let agg = period_aggregate(&flows, &period).unwrap();
        assert_eq!(agg.timeframe, Timeframe::Period("P1".into()));
        assert!(agg.f.max_abs_diff(&flows[0].f) < 1e-12);
    }

    #[test]
    fn period_mean_and_sum_of_two_years() {
        let period = Period::new("P", 1995, 1996).unwrap();
        let flows = vec![
            flow_of(FlowKind::Value, 1995, 1.0),
            flow_of(FlowKind::Value, 1996, 3.0),
        ];
        let mean = period_aggregate(&flows, &period).unwrap();
        assert_eq!(mean.get(0, 0), 2.0);
        let sum = period_aggregate(&flows, &period.clone().with_mode(PeriodMode::Sum)).unwrap();
        assert_eq!(sum.get(1, 1), 4.0);
    }

    #[test]
    fn period_aggregate_matches_loop_accumulation() {
        let mut rng = crate::synthetic::Rng64::new(3);
        let period = Period::new("P1", 1995, 2001).unwrap();
        let flows: Vec<_> = (1995..=2001)
            .map(|y| {
                RegionFlowMatrix::new(
                    FlowKind::Emission,
                    Timeframe::Year(y),
                    vec!["A".into(), "B".into(), "C".into()],
                    Matrix::from_fn(3, 3, |_, _| rng.next_f64()),
                )
                .unwrap()
            })
            .collect();
        let agg = period_aggregate(&flows, &period).unwrap();
        for r in 0..3 {
            for s in 0..3 {
                let mut acc = 0.0;
                for flow in &flows {
                    acc += flow.get(r, s);
                }
                assert!((agg.get(r, s) - acc / 7.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn period_aggregate_rejects_missing_year() {
        let period = Period::new("P", 1995, 1997).unwrap();
        let flows = vec![
            flow_of(FlowKind::Emission, 1995, 1.0),
            flow_of(FlowKind::Emission, 1997, 1.0),
        ];
        let err = period_aggregate(&flows, &period).unwrap_err();
        assert!(matches!(err, Error::MissingYear { year: 1996, .. }));
    }

    #[test]
    fn period_aggregate_rejects_label_mismatch() {
        let period = Period::new("P", 1995, 1996).unwrap();
        let mut other = flow_of(FlowKind::Emission, 1996, 1.0);
        other.labels = vec!["A".into(), "X".into()];
        let err =
            period_aggregate(&[flow_of(FlowKind::Emission, 1995, 1.0), other], &period)
                .unwrap_err();
        assert!(matches!(err, Error::LabelMismatch { .. }));
    }
}
