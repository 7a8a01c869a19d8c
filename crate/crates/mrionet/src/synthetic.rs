//! Deterministic synthetic economies for tests, benchmarks, and the bundled
//! fixture. The generator is self-contained (SplitMix64) so fixture bytes
//! never drift with dependency upgrades.

use crate::error::Result;
use crate::footprint::{LeontiefFactor, DEFAULT_RCOND_THRESHOLD};
use crate::ingest::MrioSnapshot;
use crate::matrix::Matrix;
use crate::schema::RegionSchema;

/// SplitMix64 stream; uniform doubles in [0, 1).
#[derive(Debug, Clone)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Shape of a generated economy.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub regions: usize,
    pub sectors: usize,
    pub seed: u64,
    /// Target spectral radius for the direct requirements matrix.
    pub spectral_radius: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            regions: 3,
            sectors: 2,
            seed: 0x6d72696f,
            spectral_radius: 0.65,
        }
    }
}

/// Scales a nonnegative matrix so its spectral radius hits `target`.
pub fn scale_to_spectral_radius(m: &Matrix, target: f64) -> Matrix {
    let rho = m.spectral_radius(400);
    if rho == 0.0 {
        return m.clone();
    }
    m.scale(target / rho)
}

/// Builds one balanced year: random A at the target spectral radius, random
/// final demand, x = L·(Y·1) so that x = Z·1 + Y·1 holds by construction,
/// and random per-unit extension intensities.
pub fn generate_snapshot(spec: &SyntheticSpec, year: u16) -> Result<MrioSnapshot> {
    let schema = RegionSchema::new(
        (0..spec.regions)
            .map(|r| format!("R{}", (b'A' + (r % 26) as u8) as char))
            .collect(),
        (0..spec.sectors).map(|k| format!("s{}", k + 1)).collect(),
    )?;
    let n = schema.flat_size();
    let m = schema.region_count();
    let mut rng = Rng64::new(spec.seed ^ (year as u64).wrapping_mul(0x9e3779b9));

    let raw = Matrix::from_fn(n, n, |_, _| rng.next_f64());
    let a = scale_to_spectral_radius(&raw, spec.spectral_radius);
    let y = Matrix::from_fn(n, m, |_, _| rng.range(10.0, 100.0));

    let factor = LeontiefFactor::new(&a, DEFAULT_RCOND_THRESHOLD)?;
    let y_total = Matrix::from_rows(y.row_sums().into_iter().map(|v| vec![v]).collect())?;
    let x_col = factor.solve_matrix(&y_total)?;
    let x: Vec<f64> = (0..n).map(|i| x_col[(i, 0)]).collect();

    let z = Matrix::from_fn(n, n, |i, j| a[(i, j)] * x[j]);
    let ext_emission: Vec<f64> = x.iter().map(|xi| xi * rng.range(0.05, 1.2)).collect();
    let ext_value: Vec<f64> = x.iter().map(|xi| xi * rng.range(0.2, 0.7)).collect();

    MrioSnapshot::new(year, z, y, x, ext_emission, ext_value, schema)
}

/// Generates snapshots for a span of years with the same schema.
pub fn generate_years(spec: &SyntheticSpec, years: impl Iterator<Item = u16>) -> Result<Vec<MrioSnapshot>> {
    years.map(|y| generate_snapshot(spec, y)).collect()
}
