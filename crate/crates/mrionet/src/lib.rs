//! Turns environmentally-extended multi-regional input-output (EE-MRIO)
//! tables into region-to-region emission and value-added footprint flows,
//! the ecological economic equality index (EEEI), and weighted directed
//! trade networks with PageRank and clustering metrics, exported as
//! Gephi-compatible GEXF plus CSV/JSON tables.
//!
//! The crate is organized along the processing chain:
//!
//! - [`ingest`]: raw table parsing (canonical CSV or ExioBase ixi),
//!   balance validation, region aggregation.
//! - [`footprint`]: technical coefficients, Leontief solve, intensities,
//!   footprint flow matrices, period aggregation.
//! - [`equality`]: net flows, min-max scaling, EEEI, distances, quadrants.
//! - [`network`]: net-flow and inequality graph construction, PageRank,
//!   weighted clustering.
//! - [`export`]: GEXF write/read and CSV/JSON result tables.
//! - [`synthetic`]: deterministic fixture economies for tests and benches.

pub mod equality;
pub mod error;
pub mod export;
pub mod footprint;
pub mod ingest;
pub mod matrix;
pub mod network;
pub mod schema;
pub mod synthetic;

pub use equality::{
    classify_quadrant, distance_matrix, eeei, eeei_distance, eeei_records, minmax_scale,
    net_flows, EeeiRecord, NetFlowVector, Orientation, Quadrant,
};
pub use error::{Error, Result};
pub use export::{MetricRecord, OutputFormat, ResultTable};
pub use footprint::{
    compute_footprints, compute_output, footprint_flows, intensity, leontief_inverse,
    period_aggregate, technical_coefficients, Coefficients, FlowKind, FootprintOptions,
    IntensityResult, LeontiefFactor, Period, PeriodMode, RegionFlowMatrix, SolveStats,
    TechnologyModel, Timeframe, YearFootprints,
};
pub use ingest::{
    aggregate_flows, parse_mrio, render_canonical, validate_balance, write_canonical,
    BalanceViolation, MrioFormat, MrioSnapshot, ParseOptions, ValidationReport,
};
pub use matrix::Matrix;
pub use network::{
    build_inequality_graph, build_net_flow_graph, clustering_coefficients, pagerank,
    ClusteringResult, GraphEdge, GraphKind, GraphNode, InequalityRule, PageRankOptions,
    PageRankResult, TradeGraph,
};
pub use schema::{AggregationMap, RegionSchema};
