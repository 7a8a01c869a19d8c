use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the mrionet library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing input file: {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("failed to read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric cell at row {row}, column {column} of {}: {value:?}", path.display())]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("negative value {value} at {context} (must be nonnegative)")]
    NegativeValue { context: String, value: f64 },

    #[error("duplicate {kind} label: {label:?}")]
    DuplicateLabel { kind: &'static str, label: String },

    #[error("year {year} outside the supported range 1995-2022")]
    YearOutOfRange { year: u16 },

    #[error("region label {label:?} has no entry in the aggregation map")]
    UnmappedRegion { label: String },

    #[error("label mismatch in {context}: {detail}")]
    LabelMismatch { context: String, detail: String },

    #[error("period {label} is missing year {year}")]
    MissingYear { label: String, year: u16 },

    #[error(
        "Leontief system is numerically singular: reciprocal condition estimate {rcond:.3e} \
         is below the threshold {threshold:.3e}"
    )]
    NearSingular { rcond: f64, threshold: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed XML in {}: {detail}", path.display())]
    Xml { path: PathBuf, detail: String },

    #[error("edge {source_id:?} -> {target_id:?} references undeclared node {missing:?}")]
    DanglingEdge {
        source_id: String,
        target_id: String,
        missing: String,
    },
}

impl Error {
    /// True for failures of the numerical linear algebra itself, as opposed
    /// to data or usage problems. The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NearSingular { .. })
    }

    pub(crate) fn read(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Read {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
