//! Canonical CSV workspace layout: `index.csv` (columns region,sector),
//! headerless numeric `Z_<year>.csv` and `Y_<year>.csv`, `ext_<year>.csv`
//! with one named account per row, and an optional `x_<year>.csv` column.
//! UTF-8, `.` decimal separator, no thousands separators.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::footprint::compute_output;
use crate::ingest::{MrioSnapshot, ParseOptions};
use crate::matrix::Matrix;
use crate::schema::RegionSchema;

pub(super) fn parse(workspace: &Path, year: u16, opts: &ParseOptions) -> Result<MrioSnapshot> {
    let schema = read_index(&workspace.join("index.csv"))?;
    let n = schema.flat_size();
    let m = schema.region_count();

    let z = read_numeric_matrix(&workspace.join(format!("Z_{year}.csv")), n, n)?;
    let y = read_numeric_matrix(&workspace.join(format!("Y_{year}.csv")), n, m)?;
    let accounts = read_extensions(&workspace.join(format!("ext_{year}.csv")), n)?;
    let ext_emission = sum_accounts(&accounts, &opts.emission_accounts, n, "emission")?;
    let ext_value = sum_accounts(&accounts, &opts.value_accounts, n, "value")?;

    let x_path = workspace.join(format!("x_{year}.csv"));
    let x = if x_path.exists() {
        read_numeric_column(&x_path, n)?
    } else {
        compute_output(&z, &y)?
    };

    MrioSnapshot::new(year, z, y, x, ext_emission, ext_value, schema)
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.into() });
    }
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_index(path: &Path) -> Result<RegionSchema> {
    let mut reader = open_csv(path)?;
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if idx == 0 {
            // Header row: region,sector.
            continue;
        }
        if record.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "{} row {}: expected region,sector",
                path.display(),
                idx + 1
            )));
        }
        pairs.push((record[0].trim().to_string(), record[1].trim().to_string()));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} contains no index rows",
            path.display()
        )));
    }

    // Region order is first appearance; the sector list comes from the first
    // region's block. The file must then be exactly the region×sector cross
    // product in row-major order, so the flat index bijection holds.
    let mut regions: Vec<String> = Vec::new();
    for (region, _) in &pairs {
        if regions.last() != Some(region) {
            regions.push(region.clone());
        }
    }
    let first_region = &pairs[0].0;
    let sectors: Vec<String> = pairs
        .iter()
        .take_while(|(r, _)| r == first_region)
        .map(|(_, s)| s.clone())
        .collect();
    let schema = RegionSchema::new(regions, sectors)?;
    if pairs.len() != schema.flat_size() {
        return Err(Error::DimensionMismatch {
            context: format!("{}: rows vs region×sector grid", path.display()),
            expected: schema.flat_size(),
            found: pairs.len(),
        });
    }
    for (i, (region, sector)) in pairs.iter().enumerate() {
        let r = schema.region_of(i);
        let k = i % schema.sector_count();
        if schema.regions()[r] != *region || schema.sectors()[k] != *sector {
            return Err(Error::InvalidInput(format!(
                "{} row {}: ({region},{sector}) breaks the region×sector order; expected ({},{})",
                path.display(),
                i + 2,
                schema.regions()[r],
                schema.sectors()[k]
            )));
        }
    }
    Ok(schema)
}

fn parse_cell(path: &Path, row: usize, column: usize, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::NonNumericCell {
            path: path.into(),
            row,
            column,
            value: raw.to_string(),
        })
}

fn read_numeric_matrix(path: &Path, rows: usize, cols: usize) -> Result<Matrix> {
    let mut reader = open_csv(path)?;
    let mut out = Vec::with_capacity(rows);
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() != cols {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width", path.display(), i + 1),
                expected: cols,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(cols);
        for (j, cell) in record.iter().enumerate() {
            row.push(parse_cell(path, i + 1, j + 1, cell)?);
        }
        out.push(row);
    }
    if out.len() != rows {
        return Err(Error::DimensionMismatch {
            context: format!("{} row count", path.display()),
            expected: rows,
            found: out.len(),
        });
    }
    Matrix::from_rows(out)
}

fn read_numeric_column(path: &Path, n: usize) -> Result<Vec<f64>> {
    let m = read_numeric_matrix(path, n, 1)?;
    Ok((0..n).map(|i| m[(i, 0)]).collect())
}

fn read_extensions(path: &Path, n: usize) -> Result<Vec<(String, Vec<f64>)>> {
    let mut reader = open_csv(path)?;
    let mut accounts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width (account + {n} values)", path.display(), i + 1),
                expected: n + 1,
                found: record.len(),
            });
        }
        let name = record[0].trim().to_string();
        let mut values = Vec::with_capacity(n);
        for (j, cell) in record.iter().skip(1).enumerate() {
            values.push(parse_cell(path, i + 1, j + 2, cell)?);
        }
        accounts.push((name, values));
    }
    Ok(accounts)
}

pub(super) fn sum_accounts(
    accounts: &[(String, Vec<f64>)],
    wanted: &[String],
    n: usize,
    role: &str,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for name in wanted {
        let row = accounts
            .iter()
            .find(|(a, _)| a == name)
            .ok_or_else(|| {
                Error::InvalidInput(format!("{role} account {name:?} not found in extension table"))
            })?;
        for (o, v) in out.iter_mut().zip(&row.1) {
            *o += v;
        }
    }
    Ok(out)
}

fn fmt_row(values: impl Iterator<Item = f64>) -> String {
    values
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders a snapshot as canonical workspace files, returned as
/// (filename, bytes) pairs. Numbers use the shortest decimal form that
/// round-trips the exact f64 value, so a re-parse reproduces the snapshot
/// bit for bit.
pub fn render_canonical(snapshot: &MrioSnapshot) -> Vec<(String, Vec<u8>)> {
    let year = snapshot.year;
    let n = snapshot.schema.flat_size();

    let mut index = String::from("region,sector\n");
    for i in 0..n {
        let r = snapshot.schema.region_of(i);
        let k = i % snapshot.schema.sector_count();
        index.push_str(&format!(
            "{},{}\n",
            snapshot.schema.regions()[r],
            snapshot.schema.sectors()[k]
        ));
    }

    let mut z = String::new();
    for i in 0..n {
        z.push_str(&fmt_row(snapshot.z.row(i).iter().copied()));
        z.push('\n');
    }
    let mut y = String::new();
    for i in 0..n {
        y.push_str(&fmt_row(snapshot.y.row(i).iter().copied()));
        y.push('\n');
    }
    let ext = format!(
        "emission,{}\nvalue_added,{}\n",
        fmt_row(snapshot.ext_emission.iter().copied()),
        fmt_row(snapshot.ext_value.iter().copied())
    );
    let mut x = String::new();
    for v in &snapshot.x {
        x.push_str(&v.to_string());
        x.push('\n');
    }
    vec![
        ("index.csv".to_string(), index.into_bytes()),
        (format!("Z_{year}.csv"), z.into_bytes()),
        (format!("Y_{year}.csv"), y.into_bytes()),
        (format!("ext_{year}.csv"), ext.into_bytes()),
        (format!("x_{year}.csv"), x.into_bytes()),
    ]
}

/// Writes a snapshot back out as a canonical workspace.
pub fn write_canonical(snapshot: &MrioSnapshot, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    for (name, bytes) in render_canonical(snapshot) {
        write_file(&dir.join(name), &bytes)?;
    }
    Ok(())
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::write(path.clone(), e))?;
    file.write_all(bytes).map_err(|e| Error::write(path.clone(), e))
}
