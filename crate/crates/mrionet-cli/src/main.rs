use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mrionet_cli::commands;
use mrionet_cli::config::{CliOverrides, RunConfig};

/// EE-MRIO footprint flows, the ecological economic equality index, and
/// trade network analytics with Gephi-compatible exports.
#[derive(Debug, Parser)]
#[command(name = "mrionet", version, about)]
struct Cli {
    /// TOML run configuration; flags and --set override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory holding the raw tables.
    #[arg(long, global = true, value_name = "PATH")]
    workspace: Option<PathBuf>,

    /// Output directory for run artifacts.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Inclusive year range, e.g. 1995..2022.
    #[arg(long, global = true, value_name = "A..B")]
    years: Option<String>,

    /// Restrict footprint/network stages to one configured period label.
    #[arg(long, global = true, value_name = "LABEL")]
    period: Option<String>,

    /// Network kind: emission, value, or inequality (default: all three).
    #[arg(long, global = true, value_name = "KIND", value_parser = ["emission", "value", "inequality"])]
    kind: Option<String>,

    /// EEEI sign convention: advantage_high or literal_eq8.
    #[arg(long, global = true, value_name = "ORIENTATION", value_parser = ["advantage_high", "literal_eq8"])]
    orientation: Option<String>,

    /// Worker threads for per-year footprint solves.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Override any config value by dotted key, e.g. --set pagerank.damping=0.9.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate raw tables; write the canonical workspace copy.
    Ingest,
    /// Compute emission/value footprint flow matrices per year and period.
    Footprint,
    /// Compute the EEEI time series and per-timeframe distance matrices.
    Eeei,
    /// Build trade networks and compute PageRank/clustering metrics.
    Network,
    /// Convert a result table (flows/eeei/metrics CSV) to CSV or JSON.
    Export {
        /// Source table file.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Table type: flows, eeei, or metrics.
        #[arg(long, value_name = "TABLE")]
        table: String,
        /// Target format: csv or json.
        #[arg(long, value_name = "FORMAT", default_value = "json")]
        format: String,
        /// Destination file.
        #[arg(long, value_name = "PATH")]
        to: PathBuf,
    },
    /// Run ingest, footprint, eeei, and network, then write the manifest.
    Pipeline,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<mrionet::Error>(), Some(e) if e.is_numerical()));
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::Export {
        input,
        table,
        format,
        to,
    } = &cli.command
    {
        return commands::cmd_export(input, table, format, to);
    }

    let overrides = CliOverrides {
        workspace: cli.workspace.clone(),
        out: cli.out.clone(),
        years: cli.years.clone(),
        orientation: cli.orientation.clone(),
        jobs: cli.jobs,
        set: cli.set.clone(),
    };
    let config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Ingest => commands::cmd_ingest(&config),
        Command::Footprint => commands::cmd_footprint(&config, cli.period.as_deref()),
        Command::Eeei => commands::cmd_eeei(&config),
        Command::Network => {
            commands::cmd_network(&config, cli.kind.as_deref(), cli.period.as_deref())
        }
        Command::Pipeline => commands::cmd_pipeline(&config),
        Command::Export { .. } => unreachable!("handled above"),
    }
}
