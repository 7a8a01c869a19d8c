//! Adapter for the ExioBase industry-by-industry tab-separated layout:
//! `Z.txt` and `Y.txt` with two header rows (region, sector/category) and two
//! label columns, `satellite/F.txt` with one stressor-name column, and an
//! optional `x.txt`. Final-demand categories are summed to one column per
//! destination region at parse time.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::footprint::compute_output;
use crate::ingest::canonical::sum_accounts;
use crate::ingest::{MrioSnapshot, ParseOptions};
use crate::matrix::Matrix;
use crate::schema::RegionSchema;

/// Default emission rows for ExioBase satellite accounts: the CO2
/// combustion stressor.
pub const DEFAULT_EMISSION_ACCOUNTS: [&str; 1] = ["CO2 - combustion - air"];

/// Default value-added rows for ExioBase satellite accounts: the nine
/// factor-input components.
pub const DEFAULT_VALUE_ACCOUNTS: [&str; 9] = [
    "Taxes less subsidies on products purchased: Total",
    "Other net taxes on production",
    "Compensation of employees; wages, salaries, & employers' social contributions: Low-skilled",
    "Compensation of employees; wages, salaries, & employers' social contributions: Medium-skilled",
    "Compensation of employees; wages, salaries, & employers' social contributions: High-skilled",
    "Operating surplus: Consumption of fixed capital",
    "Operating surplus: Rents on land",
    "Operating surplus: Royalties on resources",
    "Operating surplus: Remaining net operating surplus",
];

pub(super) fn parse(workspace: &Path, year: u16, opts: &ParseOptions) -> Result<MrioSnapshot> {
    let dir = resolve_year_dir(workspace, year)?;
    let (schema, z) = read_z(&dir.join("Z.txt"))?;
    let y = read_y(&dir.join("Y.txt"), &schema)?;
    let accounts = read_f(&dir.join("satellite").join("F.txt"), schema.flat_size())?;
    let n = schema.flat_size();
    let ext_emission = sum_accounts(&accounts, &opts.emission_accounts, n, "emission")?;
    let ext_value = sum_accounts(&accounts, &opts.value_accounts, n, "value")?;

    let x_path = dir.join("x.txt");
    let x = if x_path.exists() {
        read_x(&x_path, n)?
    } else {
        compute_output(&z, &y)?
    };
    MrioSnapshot::new(year, z, y, x, ext_emission, ext_value, schema)
}

/// A workspace either contains the per-year archive directory
/// (`IOT_<year>_ixi/`) or is itself one year's directory.
fn resolve_year_dir(workspace: &Path, year: u16) -> Result<PathBuf> {
    let per_year = workspace.join(format!("IOT_{year}_ixi"));
    if per_year.is_dir() {
        return Ok(per_year);
    }
    if workspace.join("Z.txt").exists() {
        return Ok(workspace.to_path_buf());
    }
    Err(Error::MissingFile {
        path: per_year.join("Z.txt"),
    })
}

struct TsvTable {
    /// Per header row, the trailing `ncols` labels.
    header_labels: Vec<Vec<String>>,
    /// Per data row, its leading label cells.
    row_labels: Vec<Vec<String>>,
    values: Matrix,
}

/// Reads a tab-separated table with `header_rows` header lines and
/// `label_cols` leading label columns on each data row. Header lines may
/// carry any number of leading cells; only the trailing value-column labels
/// are kept.
fn read_tsv(path: &Path, header_rows: usize, label_cols: usize) -> Result<TsvTable> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.into() });
    }
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() <= header_rows {
        return Err(Error::InvalidInput(format!(
            "{}: expected {header_rows} header rows plus data",
            path.display()
        )));
    }

    let first_data: Vec<&str> = lines[header_rows].split('\t').collect();
    if first_data.len() <= label_cols {
        return Err(Error::InvalidInput(format!(
            "{}: data rows need at least {} columns",
            path.display(),
            label_cols + 1
        )));
    }
    let ncols = first_data.len() - label_cols;

    let mut header_labels = Vec::with_capacity(header_rows);
    for line in &lines[..header_rows] {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() < ncols {
            return Err(Error::DimensionMismatch {
                context: format!("{} header width", path.display()),
                expected: ncols,
                found: cells.len(),
            });
        }
        header_labels.push(
            cells[cells.len() - ncols..]
                .iter()
                .map(|c| c.trim().to_string())
                .collect(),
        );
    }

    let mut row_labels = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines[header_rows..].iter().enumerate() {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != label_cols + ncols {
            return Err(Error::DimensionMismatch {
                context: format!("{} row {} width", path.display(), i + header_rows + 1),
                expected: label_cols + ncols,
                found: cells.len(),
            });
        }
        row_labels.push(cells[..label_cols].iter().map(|c| c.trim().to_string()).collect());
        let mut row = Vec::with_capacity(ncols);
        for (j, cell) in cells[label_cols..].iter().enumerate() {
            row.push(cell.trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
                path: path.into(),
                row: i + header_rows + 1,
                column: label_cols + j + 1,
                value: cell.to_string(),
            })?);
        }
        rows.push(row);
    }
    Ok(TsvTable {
        header_labels,
        row_labels,
        values: Matrix::from_rows(rows)?,
    })
}

fn read_z(path: &Path) -> Result<(RegionSchema, Matrix)> {
    let table = read_tsv(path, 2, 2)?;
    let n = table.values.rows();
    if table.values.cols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("{}: Z must be square", path.display()),
            expected: n,
            found: table.values.cols(),
        });
    }

    let mut regions: Vec<String> = Vec::new();
    for labels in &table.row_labels {
        if regions.last() != Some(&labels[0]) {
            regions.push(labels[0].clone());
        }
    }
    let first_region = &table.row_labels[0][0];
    let sectors: Vec<String> = table
        .row_labels
        .iter()
        .take_while(|l| &l[0] == first_region)
        .map(|l| l[1].clone())
        .collect();
    let schema = RegionSchema::new(regions, sectors)?;
    if schema.flat_size() != n {
        return Err(Error::DimensionMismatch {
            context: format!("{}: row index vs region×sector grid", path.display()),
            expected: schema.flat_size(),
            found: n,
        });
    }
    for i in 0..n {
        let r = schema.region_of(i);
        let k = i % schema.sector_count();
        let row = &table.row_labels[i];
        let col_region = &table.header_labels[0][i];
        let col_sector = &table.header_labels[1][i];
        if row[0] != schema.regions()[r]
            || row[1] != schema.sectors()[k]
            || col_region != &schema.regions()[r]
            || col_sector != &schema.sectors()[k]
        {
            return Err(Error::LabelMismatch {
                context: format!("{} index {}", path.display(), i),
                detail: format!(
                    "expected ({},{}), row ({},{}), column ({col_region},{col_sector})",
                    schema.regions()[r],
                    schema.sectors()[k],
                    row[0],
                    row[1]
                ),
            });
        }
    }
    Ok((schema, table.values))
}

/// Reads final demand and sums category columns per destination region,
/// reordered to the schema's region order.
fn read_y(path: &Path, schema: &RegionSchema) -> Result<Matrix> {
    let table = read_tsv(path, 2, 2)?;
    let n = schema.flat_size();
    if table.values.rows() != n {
        return Err(Error::DimensionMismatch {
            context: format!("{} row count", path.display()),
            expected: n,
            found: table.values.rows(),
        });
    }
    let m = schema.region_count();
    let mut summed = Matrix::zeros(n, m);
    for (col, dest) in table.header_labels[0].iter().enumerate() {
        let region_idx = schema.region_index(dest).ok_or_else(|| Error::LabelMismatch {
            context: format!("{} column {}", path.display(), col + 3),
            detail: format!("destination region {dest:?} is not in the Z index"),
        })?;
        for i in 0..n {
            summed[(i, region_idx)] += table.values[(i, col)];
        }
    }
    Ok(summed)
}

fn read_f(path: &Path, n: usize) -> Result<Vec<(String, Vec<f64>)>> {
    let table = read_tsv(path, 2, 1)?;
    if table.values.cols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("{} column count", path.display()),
            expected: n,
            found: table.values.cols(),
        });
    }
    Ok(table
        .row_labels
        .iter()
        .zip(0..table.values.rows())
        .map(|(labels, i)| (labels[0].clone(), table.values.row(i).to_vec()))
        .collect())
}

/// `x.txt`: one header row, then region/sector/indout rows in flat order.
fn read_x(path: &Path, n: usize) -> Result<Vec<f64>> {
    let table = read_tsv(path, 1, 2)?;
    if table.values.rows() != n || table.values.cols() != 1 {
        return Err(Error::DimensionMismatch {
            context: format!("{} shape", path.display()),
            expected: n,
            found: table.values.rows(),
        });
    }
    Ok((0..n).map(|i| table.values[(i, 0)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_mrio, MrioFormat};

    /// Two regions × two sectors, two demand categories per region.
    fn write_mini_ixi(dir: &Path) {
        fs::create_dir_all(dir.join("satellite")).unwrap();
        let z = "region\tsector\tAA\tAA\tBB\tBB\n\
                 \t\ts1\ts2\ts1\ts2\n\
                 AA\ts1\t0.1\t0.2\t0.0\t0.3\n\
                 AA\ts2\t0.0\t0.1\t0.2\t0.0\n\
                 BB\ts1\t0.3\t0.0\t0.1\t0.1\n\
                 BB\ts2\t0.0\t0.2\t0.0\t0.1\n";
        fs::write(dir.join("Z.txt"), z).unwrap();
        let y = "region\tcategory\tAA\tAA\tBB\tBB\n\
                 \t\thouseholds\tgovernment\thouseholds\tgovernment\n\
                 AA\ts1\t1.0\t0.5\t0.2\t0.1\n\
                 AA\ts2\t0.4\t0.1\t0.0\t0.2\n\
                 BB\ts1\t0.0\t0.3\t1.1\t0.4\n\
                 BB\ts2\t0.2\t0.0\t0.3\t0.6\n";
        fs::write(dir.join("Y.txt"), y).unwrap();
        let f = "region\tAA\tAA\tBB\tBB\n\
                 sector\ts1\ts2\ts1\ts2\n\
                 CO2 - combustion - air\t5\t6\t7\t8\n\
                 Taxes less subsidies on products purchased: Total\t1\t1\t1\t1\n\
                 Other stressor\t9\t9\t9\t9\n";
        fs::write(dir.join("satellite").join("F.txt"), f).unwrap();
    }

    fn exio_opts() -> ParseOptions {
        ParseOptions {
            emission_accounts: vec!["CO2 - combustion - air".to_string()],
            value_accounts: vec![
                "Taxes less subsidies on products purchased: Total".to_string(),
            ],
        }
    }

    #[test]
    fn parses_mini_ixi_workspace() {
        let dir = tempfile::tempdir().unwrap();
        write_mini_ixi(dir.path());
        let snapshot =
            parse_mrio(dir.path(), 1995, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap();
        assert_eq!(snapshot.schema.regions(), &["AA".to_string(), "BB".to_string()]);
        assert_eq!(snapshot.schema.sectors(), &["s1".to_string(), "s2".to_string()]);
        assert_eq!(snapshot.z[(0, 1)], 0.2);
        assert_eq!(snapshot.z[(2, 0)], 0.3);
        // Categories summed per destination region.
        assert_eq!(snapshot.y[(0, 0)], 1.5);
        assert_eq!(snapshot.y[(0, 1)], 0.30000000000000004);
        assert_eq!(snapshot.ext_emission, vec![5.0, 6.0, 7.0, 8.0]);
        assert_eq!(snapshot.ext_value, vec![1.0, 1.0, 1.0, 1.0]);
        // x computed from Z and Y row sums when x.txt is absent.
        let expect_x0 = 0.1 + 0.2 + 0.0 + 0.3 + 1.0 + 0.5 + 0.2 + 0.1;
        assert!((snapshot.x[0] - expect_x0).abs() < 1e-12);
    }

    #[test]
    fn per_year_archive_directory_is_resolved() {
        let dir = tempfile::tempdir().unwrap();
        let year_dir = dir.path().join("IOT_2003_ixi");
        write_mini_ixi(&year_dir);
        let snapshot =
            parse_mrio(dir.path(), 2003, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap();
        assert_eq!(snapshot.year, 2003);
    }

    #[test]
    fn x_file_is_used_when_present() {
        let dir = tempfile::tempdir().unwrap();
        write_mini_ixi(dir.path());
        fs::write(
            dir.path().join("x.txt"),
            "region\tsector\tindout\nAA\ts1\t10\nAA\ts2\t11\nBB\ts1\t12\nBB\ts2\t13\n",
        )
        .unwrap();
        let snapshot =
            parse_mrio(dir.path(), 1995, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap();
        assert_eq!(snapshot.x, vec![10.0, 11.0, 12.0, 13.0]);
    }

    #[test]
    fn negative_demand_categories_may_cancel_in_region_sum() {
        // Inventory drawdowns can be negative per category; the snapshot
        // nonnegativity check applies to the per-region sum.
        let dir = tempfile::tempdir().unwrap();
        write_mini_ixi(dir.path());
        let y = "region\tcategory\tAA\tAA\tBB\tBB\n\
                 \t\thouseholds\tinventory\thouseholds\tinventory\n\
                 AA\ts1\t1.0\t-0.4\t0.2\t0.1\n\
                 AA\ts2\t0.4\t0.1\t0.3\t-0.2\n\
                 BB\ts1\t0.5\t-0.3\t1.1\t0.4\n\
                 BB\ts2\t0.2\t0.0\t0.3\t0.6\n";
        fs::write(dir.path().join("Y.txt"), y).unwrap();
        let snapshot =
            parse_mrio(dir.path(), 1995, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap();
        assert!((snapshot.y[(0, 0)] - 0.6).abs() < 1e-12);
        assert!((snapshot.y[(1, 1)] - 0.1).abs() < 1e-12);

        // A category deficit exceeding the rest of the region sum violates
        // the nonnegativity invariant and is rejected.
        let y_bad = y.replace("1.0\t-0.4", "0.1\t-0.4");
        fs::write(dir.path().join("Y.txt"), y_bad).unwrap();
        let err =
            parse_mrio(dir.path(), 1995, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap_err();
        assert!(matches!(err, Error::NegativeValue { .. }));
    }

    #[test]
    fn missing_account_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_mini_ixi(dir.path());
        let opts = ParseOptions {
            emission_accounts: vec!["No such row".to_string()],
            ..exio_opts()
        };
        let err = parse_mrio(dir.path(), 1995, MrioFormat::ExiobaseIxi, &opts).unwrap_err();
        assert!(err.to_string().contains("No such row"));
    }

    #[test]
    fn missing_workspace_reports_expected_path() {
        let dir = tempfile::tempdir().unwrap();
        let err =
            parse_mrio(dir.path(), 1999, MrioFormat::ExiobaseIxi, &exio_opts()).unwrap_err();
        assert!(matches!(err, Error::MissingFile { path } if path.to_string_lossy().contains("IOT_1999_ixi")));
    }
}
