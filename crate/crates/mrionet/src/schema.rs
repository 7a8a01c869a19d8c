//! Region/sector index schema and the native-to-study region aggregation map.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered region and sector labels. Flat index `i` maps bijectively to
/// `(region r, sector k)` by `i = r * |sectors| + k`, i.e. the row order of
/// the index file: all sectors of the first region, then the next region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSchema {
    regions: Vec<String>,
    sectors: Vec<String>,
}

impl RegionSchema {
    pub fn new(regions: Vec<String>, sectors: Vec<String>) -> Result<Self> {
        if regions.is_empty() || sectors.is_empty() {
            return Err(Error::InvalidInput(
                "schema needs at least one region and one sector".into(),
            ));
        }
        check_unique("region", &regions)?;
        check_unique("sector", &sectors)?;
        Ok(RegionSchema { regions, sectors })
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn flat_size(&self) -> usize {
        self.regions.len() * self.sectors.len()
    }

    pub fn flat_index(&self, region: usize, sector: usize) -> usize {
        debug_assert!(region < self.regions.len() && sector < self.sectors.len());
        region * self.sectors.len() + sector
    }

    /// Region index owning flat index `i`.
    pub fn region_of(&self, flat: usize) -> usize {
        debug_assert!(flat < self.flat_size());
        flat / self.sectors.len()
    }

    pub fn region_index(&self, code: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == code)
    }
}

fn check_unique(kind: &'static str, labels: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel {
                kind,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

/// Many-to-one mapping from native region codes to an ordered list of
/// aggregated study regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationMap {
    mapping: BTreeMap<String, String>,
    aggregated_order: Vec<String>,
}

impl AggregationMap {
    pub fn new(mapping: BTreeMap<String, String>, aggregated_order: Vec<String>) -> Result<Self> {
        check_unique("aggregated region", &aggregated_order)?;
        let known: BTreeSet<&str> = aggregated_order.iter().map(String::as_str).collect();
        for (native, agg) in &mapping {
            if !known.contains(agg.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "aggregation map sends {native:?} to {agg:?}, which is not in the aggregated region list"
                )));
            }
        }
        Ok(AggregationMap {
            mapping,
            aggregated_order,
        })
    }

    /// Identity map over the given labels, preserving their order.
    pub fn identity(labels: &[String]) -> Result<Self> {
        let mapping = labels
            .iter()
            .map(|l| (l.clone(), l.clone()))
            .collect::<BTreeMap<_, _>>();
        AggregationMap::new(mapping, labels.to_vec())
    }

    /// Loads a CSV with columns `native_code,aggregated_code`. The aggregated
    /// order is the order of first appearance in the file.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::MissingFile { path: path.into() },
                _ => Error::InvalidInput(format!("{}: {e}", path.display())),
            })?;
        let mut mapping = BTreeMap::new();
        let mut order = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            if record.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "{} row {}: expected native_code,aggregated_code",
                    path.display(),
                    idx + 2
                )));
            }
            let native = record[0].trim().to_string();
            let agg = record[1].trim().to_string();
            if mapping.insert(native.clone(), agg.clone()).is_some() {
                return Err(Error::DuplicateLabel {
                    kind: "native region",
                    label: native,
                });
            }
            if !order.contains(&agg) {
                order.push(agg);
            }
        }
        AggregationMap::new(mapping, order)
    }

    /// The builtin 13-region study scheme over the 49 ExioBase ixi region
    /// codes: the EU27 members plus the UK fold into EU27/UK, ten singleton
    /// economies keep their own code, and the five RoW blocks together with
    /// Taiwan, Turkey, South Africa, Norway, and Switzerland fold into RoW.
    pub fn exiobase_13() -> Self {
        const EU: [&str; 28] = [
            "AT", "BE", "BG", "CY", "CZ", "DE", "DK", "EE", "ES", "FI", "FR", "GB", "GR", "HR",
            "HU", "IE", "IT", "LT", "LU", "LV", "MT", "NL", "PL", "PT", "RO", "SE", "SI", "SK",
        ];
        const SINGLE: [&str; 11] = [
            "AU", "BR", "CA", "CN", "ID", "IN", "JP", "KR", "MX", "RU", "US",
        ];
        const ROW: [&str; 10] = ["CH", "NO", "TR", "TW", "ZA", "WA", "WE", "WF", "WL", "WM"];

        let mut mapping = BTreeMap::new();
        for code in EU {
            mapping.insert(code.to_string(), "EU27/UK".to_string());
        }
        for code in SINGLE {
            mapping.insert(code.to_string(), code.to_string());
        }
        for code in ROW {
            mapping.insert(code.to_string(), "RoW".to_string());
        }
        let order = [
            "AU", "BR", "CA", "CN", "EU27/UK", "ID", "IN", "JP", "KR", "MX", "RoW", "RU", "US",
        ]
        .into_iter()
        .map(str::to_string)
        .collect();
        AggregationMap::new(mapping, order).expect("builtin map is consistent")
    }

    pub fn target(&self, native: &str) -> Result<&str> {
        self.mapping
            .get(native)
            .map(String::as_str)
            .ok_or_else(|| Error::UnmappedRegion {
                label: native.to_string(),
            })
    }

    pub fn aggregated_order(&self) -> &[String] {
        &self.aggregated_order
    }

    pub fn native_codes(&self) -> impl Iterator<Item = &str> {
        self.mapping.keys().map(String::as_str)
    }
}
