//! Serialization of graphs and tabular results: GEXF, CSV, JSON.

pub mod gexf;
pub mod tables;

pub use gexf::{conformance_errors, read_gexf, read_gexf_str, render_gexf, write_gexf, GexfImport};
pub use tables::{
    eeei_csv, flow_csv, labeled_matrix_csv, metrics_csv, read_eeei_csv, read_flow_csv,
    read_metrics_csv, write_results, MetricRecord, OutputFormat, ResultTable, NETWORK_ROW,
};
