//! Stage implementations behind the CLI subcommands. Each stage consumes
//! only its declared upstream files, writes its outputs through the
//! content-hash cache, and emits a JSON report.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use mrionet::equality::eeei_records;
use mrionet::export::{
    eeei_csv, flow_csv, labeled_matrix_csv, metrics_csv, read_eeei_csv, read_flow_csv,
    read_metrics_csv, render_gexf, write_results, MetricRecord, OutputFormat, ResultTable,
    NETWORK_ROW,
};
use mrionet::footprint::{
    compute_footprints, period_aggregate, FlowKind, FootprintOptions, Period, Timeframe,
};
use mrionet::ingest::{parse_mrio, render_canonical, validate_balance, MrioFormat, ParseOptions};
use mrionet::network::{
    build_inequality_graph, build_net_flow_graph, clustering_coefficients, pagerank, GraphKind,
    TradeGraph,
};
use mrionet::{distance_matrix, EeeiRecord, RegionFlowMatrix};

use crate::cache::{hash_file, input_key, write_cached, Cache};
use crate::config::RunConfig;
use crate::report::{FootprintYearReport, IngestYearReport, NetworkReport, StageReport};

fn log(stage: &str, msg: impl std::fmt::Display) {
    eprintln!("[{stage}] {msg}");
}

fn flow_rel(kind: FlowKind, timeframe: &Timeframe) -> String {
    format!("flows/flows_{kind}_{timeframe}.csv")
}

fn canonical_rel(name: &str) -> String {
    format!("canonical/{name}")
}

/// Directory the footprint stage reads canonical tables from: the ingested
/// copy when present, otherwise a canonical-format workspace directly.
fn canonical_source(config: &RunConfig) -> Result<(PathBuf, ParseOptions)> {
    let ingested = config.out.join("canonical");
    if ingested.join("index.csv").exists() {
        return Ok((ingested, ParseOptions::default()));
    }
    match config.mrio_format()? {
        MrioFormat::CanonicalCsv => Ok((config.workspace.clone(), config.parse_options()?)),
        MrioFormat::ExiobaseIxi => bail!(
            "no canonical workspace at {}; run the ingest stage first",
            ingested.display()
        ),
    }
}

fn year_input_files(dir: &Path, year: u16) -> Vec<PathBuf> {
    let mut files = vec![
        dir.join("index.csv"),
        dir.join(format!("Z_{year}.csv")),
        dir.join(format!("Y_{year}.csv")),
        dir.join(format!("ext_{year}.csv")),
    ];
    let x = dir.join(format!("x_{year}.csv"));
    if x.exists() {
        files.push(x);
    }
    files
}

/// Parse raw tables, check the balance identity, and write the canonical
/// workspace copy. Soft balance violations are reported, not fatal.
pub fn cmd_ingest(config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let format = config.mrio_format()?;
    let opts = config.parse_options()?;
    let mut cache = Cache::open(&config.cache_dir());
    let mut report = StageReport::<IngestYearReport>::new("ingest");

    for year in config.years.iter() {
        let raw_inputs: Vec<PathBuf> = match format {
            MrioFormat::CanonicalCsv => year_input_files(&config.workspace, year),
            MrioFormat::ExiobaseIxi => {
                let dir = config.workspace.join(format!("IOT_{year}_ixi"));
                let dir = if dir.is_dir() {
                    dir
                } else {
                    config.workspace.clone()
                };
                ["Z.txt", "Y.txt", "satellite/F.txt"]
                    .iter()
                    .map(|f| dir.join(f))
                    .collect()
            }
        };
        for file in &raw_inputs {
            if !file.exists() {
                bail!(mrionet::Error::MissingFile { path: file.clone() });
            }
        }
        let blob = serde_json::to_string(&(
            &opts.emission_accounts,
            &opts.value_accounts,
            config.epsilon_balance,
        ))?;
        let key = input_key(&raw_inputs, &blob)?;

        let expected: Vec<String> = [
            "index.csv".to_string(),
            format!("Z_{year}.csv"),
            format!("Y_{year}.csv"),
            format!("ext_{year}.csv"),
            format!("x_{year}.csv"),
        ]
        .into_iter()
        .map(|n| canonical_rel(&n))
        .collect();
        let fresh = expected
            .iter()
            .all(|rel| cache.is_fresh(rel, &key, &config.out.join(rel)));
        if fresh {
            log("ingest", format!("{year}: cache hit"));
            report.entries.push(IngestYearReport {
                year,
                balance_violations: Vec::new(),
                zero_output_sectors: 0,
                cache_hit: true,
            });
            continue;
        }

        let snapshot = parse_mrio(&config.workspace, year, format, &opts)?;
        let balance = validate_balance(&snapshot, config.epsilon_balance);
        let zero_output = snapshot
            .x
            .iter()
            .filter(|&&x| x <= config.epsilon_x)
            .count();
        if !balance.is_clean() {
            log(
                "ingest",
                format!(
                    "{year}: {} balance violation(s), worst relative gap {:.3e}",
                    balance.violations.len(),
                    balance.violations[0].relative_gap
                ),
            );
        }
        for (name, bytes) in render_canonical(&snapshot) {
            write_cached(&mut cache, &config.out, &canonical_rel(&name), &key, &bytes)?;
        }
        log(
            "ingest",
            format!("{year}: canonical tables written (n={})", snapshot.schema.flat_size()),
        );
        report.entries.push(IngestYearReport {
            year,
            balance_violations: balance.violations,
            zero_output_sectors: zero_output,
            cache_hit: false,
        });
    }
    cache.store()?;
    report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    report.write(&config.out)?;
    Ok(())
}

struct YearSolve {
    year: u16,
    emission: RegionFlowMatrix,
    value: RegionFlowMatrix,
    stats: mrionet::SolveStats,
    balance_violations: usize,
    wall_ms: f64,
}

/// Emission and value flow matrices per configured year and period,
/// aggregated to the study regions when a map is configured.
pub fn cmd_footprint(config: &RunConfig, period_filter: Option<&str>) -> Result<()> {
    let started = Instant::now();
    let (canon_dir, parse_opts) = canonical_source(config)?;
    let aggregation = config.aggregation()?;
    let mut cache = Cache::open(&config.cache_dir());
    let mut report = StageReport::<FootprintYearReport>::new("footprint");
    report.notes.push(
        "period aggregation uses the configured period_mode (default mean of yearly \
         matrices; set period_mode=sum for period totals)"
            .to_string(),
    );

    let periods = select_periods(config, period_filter)?;
    let years: Vec<u16> = match period_filter {
        Some(_) => periods.iter().flat_map(|p| p.years()).collect(),
        None => config.years.iter().collect(),
    };

    let blob = serde_json::to_string(&(
        &parse_opts.emission_accounts,
        &parse_opts.value_accounts,
        config.epsilon_x,
        config.rcond_threshold,
        &config.aggregation_map,
    ))?;

    // Cheap single-threaded cache pass, parallel solves for the misses.
    let mut keys: BTreeMap<u16, String> = BTreeMap::new();
    let mut to_solve: Vec<u16> = Vec::new();
    for &year in &years {
        let inputs = year_input_files(&canon_dir, year);
        for file in &inputs {
            if !file.exists() {
                bail!(mrionet::Error::MissingFile { path: file.clone() });
            }
        }
        let key = input_key(&inputs, &blob)?;
        let fresh = [FlowKind::Emission, FlowKind::Value].iter().all(|&kind| {
            let rel = flow_rel(kind, &Timeframe::Year(year));
            cache.is_fresh(&rel, &key, &config.out.join(rel.as_str()))
        });
        if fresh {
            log("footprint", format!("{year}: cache hit"));
            report.entries.push(FootprintYearReport {
                year,
                zero_output_sectors: 0,
                balance_violations: 0,
                emission_intensity_dropped: 0,
                value_intensity_dropped: 0,
                rcond: f64::NAN,
                cache_hit: true,
                wall_ms: 0.0,
            });
        } else {
            to_solve.push(year);
        }
        keys.insert(year, key);
    }

    let solves = solve_years(config, &canon_dir, &parse_opts, &to_solve)?;
    for solve in solves {
        let key = &keys[&solve.year];
        let (emission, value) = match &aggregation {
            Some(map) => (
                mrionet::aggregate_flows(&solve.emission, map)?,
                mrionet::aggregate_flows(&solve.value, map)?,
            ),
            None => (solve.emission, solve.value),
        };
        for flow in [&emission, &value] {
            let rel = flow_rel(flow.kind, &flow.timeframe);
            write_cached(&mut cache, &config.out, &rel, key, &flow_csv(flow))?;
        }
        log(
            "footprint",
            format!(
                "{}: solved (rcond {:.3e}, {} zero-output sector(s)) in {:.1} ms",
                solve.year, solve.stats.rcond, solve.stats.zero_output_sectors, solve.wall_ms
            ),
        );
        report.entries.push(FootprintYearReport {
            year: solve.year,
            zero_output_sectors: solve.stats.zero_output_sectors,
            balance_violations: solve.balance_violations,
            emission_intensity_dropped: solve.stats.emission_intensity_dropped,
            value_intensity_dropped: solve.stats.value_intensity_dropped,
            rcond: solve.stats.rcond,
            cache_hit: false,
            wall_ms: solve.wall_ms,
        });
    }
    report.entries.sort_by_key(|e| e.year);

    for period in &periods {
        for kind in [FlowKind::Emission, FlowKind::Value] {
            let member_files: Vec<PathBuf> = period
                .years()
                .map(|y| config.out.join(flow_rel(kind, &Timeframe::Year(y))))
                .collect();
            let period_blob = serde_json::to_string(&(
                &period.label,
                period.start_year,
                period.end_year,
                &config.period_mode,
            ))?;
            let key = input_key(&member_files, &period_blob)?;
            let rel = flow_rel(kind, &Timeframe::Period(period.label.clone()));
            if cache.is_fresh(&rel, &key, &config.out.join(rel.as_str())) {
                log("footprint", format!("{}/{kind}: cache hit", period.label));
                continue;
            }
            let flows: Vec<RegionFlowMatrix> = period
                .years()
                .map(|y| {
                    read_flow_csv(
                        &config.out.join(flow_rel(kind, &Timeframe::Year(y))),
                        kind,
                        Timeframe::Year(y),
                    )
                })
                .collect::<mrionet::Result<_>>()?;
            let aggregated = period_aggregate(&flows, period)?;
            write_cached(&mut cache, &config.out, &rel, &key, &flow_csv(&aggregated))?;
            log(
                "footprint",
                format!("{}/{kind}: aggregated over {} year(s)", period.label, flows.len()),
            );
        }
    }
    cache.store()?;
    report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    report.write(&config.out)?;
    Ok(())
}

/// Runs the per-year solves, fanning out over `jobs` worker threads. Years
/// are independent and write to disjoint outputs, so order does not matter.
fn solve_years(
    config: &RunConfig,
    canon_dir: &Path,
    parse_opts: &ParseOptions,
    years: &[u16],
) -> Result<Vec<YearSolve>> {
    let opts = FootprintOptions {
        epsilon_x: config.epsilon_x,
        rcond_threshold: config.rcond_threshold,
    };
    let balance_epsilon = config.epsilon_balance;
    let solve_one = move |year: u16| -> Result<YearSolve> {
        let year_started = Instant::now();
        let snapshot = parse_mrio(canon_dir, year, MrioFormat::CanonicalCsv, parse_opts)
            .with_context(|| format!("footprint year {year}"))?;
        let balance = validate_balance(&snapshot, balance_epsilon);
        let footprints = compute_footprints(&snapshot, opts)
            .with_context(|| format!("footprint year {year}"))?;
        Ok(YearSolve {
            year,
            emission: footprints.emission,
            value: footprints.value,
            stats: footprints.stats,
            balance_violations: balance.violations.len(),
            wall_ms: year_started.elapsed().as_secs_f64() * 1e3,
        })
    };

    let workers = config.jobs.min(years.len().max(1));
    if workers <= 1 {
        let mut out = Vec::with_capacity(years.len());
        for &year in years {
            out.push(solve_one(year)?);
        }
        return Ok(out);
    }

    let queue: Mutex<VecDeque<u16>> = Mutex::new(years.iter().copied().collect());
    let results: Mutex<Vec<Result<YearSolve>>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let year = match queue.lock().unwrap().pop_front() {
                    Some(y) => y,
                    None => break,
                };
                let outcome = solve_one(year);
                results.lock().unwrap().push(outcome);
            });
        }
    });
    let mut solves: Vec<YearSolve> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .collect::<Result<_>>()?;
    solves.sort_by_key(|s| s.year);
    Ok(solves)
}

fn select_periods(config: &RunConfig, period_filter: Option<&str>) -> Result<Vec<Period>> {
    let periods = config.periods();
    match period_filter {
        None => Ok(periods),
        Some(label) => {
            let found: Vec<Period> = periods
                .into_iter()
                .filter(|p| p.label == label)
                .collect();
            if found.is_empty() {
                bail!("period {label:?} is not configured");
            }
            Ok(found)
        }
    }
}

fn timeframes(config: &RunConfig, period_filter: Option<&str>) -> Result<Vec<Timeframe>> {
    match period_filter {
        Some(label) => Ok(select_periods(config, Some(label))?
            .into_iter()
            .map(|p| Timeframe::Period(p.label))
            .collect()),
        None => {
            let mut frames: Vec<Timeframe> = config.years.iter().map(Timeframe::Year).collect();
            frames.extend(
                config
                    .periods()
                    .into_iter()
                    .map(|p| Timeframe::Period(p.label)),
            );
            Ok(frames)
        }
    }
}

fn load_flow_pair(
    config: &RunConfig,
    timeframe: &Timeframe,
) -> Result<(RegionFlowMatrix, RegionFlowMatrix)> {
    let load = |kind: FlowKind| -> Result<RegionFlowMatrix> {
        let rel = flow_rel(kind, timeframe);
        let path = config.out.join(&rel);
        read_flow_csv(&path, kind, timeframe.clone())
            .with_context(|| format!("missing upstream {rel}; run the footprint stage first"))
    };
    Ok((load(FlowKind::Emission)?, load(FlowKind::Value)?))
}

/// EEEI time series plus per-timeframe distance matrices, from the flow
/// files of every configured timeframe.
pub fn cmd_eeei(config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let orientation = config.orientation_enum()?;
    let mut cache = Cache::open(&config.cache_dir());
    let mut report = StageReport::<serde_json::Value>::new("eeei");

    let frames = timeframes(config, None)?;
    let mut series: Vec<EeeiRecord> = Vec::new();
    let mut input_files: Vec<PathBuf> = Vec::new();
    for timeframe in &frames {
        let (e_flow, v_flow) = load_flow_pair(config, timeframe)?;
        input_files.push(config.out.join(flow_rel(FlowKind::Emission, timeframe)));
        input_files.push(config.out.join(flow_rel(FlowKind::Value, timeframe)));
        let records = eeei_records(&e_flow, &v_flow, orientation)?;

        let blob = serde_json::to_string(&(config.orientation.as_str(), timeframe))?;
        let key = input_key(
            &input_files[input_files.len() - 2..],
            &blob,
        )?;
        let rel = format!("eeei/distance_{timeframe}.csv");
        if !cache.is_fresh(&rel, &key, &config.out.join(rel.as_str())) {
            let matrix = distance_matrix(&records);
            let labels: Vec<String> = records.iter().map(|r| r.region.clone()).collect();
            write_cached(
                &mut cache,
                &config.out,
                &rel,
                &key,
                labeled_matrix_csv(&labels, &matrix).as_bytes(),
            )?;
        }
        report.entries.push(serde_json::json!({
            "timeframe": timeframe.to_string(),
            "regions": records.len(),
        }));
        series.extend(records);
    }

    let blob = serde_json::to_string(&config.orientation)?;
    let key = input_key(&input_files, &blob)?;
    let rel = "eeei/eeei_series.csv";
    if cache.is_fresh(rel, &key, &config.out.join(rel)) {
        log("eeei", "series: cache hit");
    } else {
        write_cached(&mut cache, &config.out, rel, &key, &eeei_csv(&series))?;
        log(
            "eeei",
            format!("series written: {} rows over {} timeframe(s)", series.len(), frames.len()),
        );
    }
    cache.store()?;
    report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    report.write(&config.out)?;
    Ok(())
}

fn kind_list(kind_filter: Option<&str>) -> Result<Vec<GraphKind>> {
    match kind_filter {
        None => Ok(vec![
            GraphKind::EmissionNet,
            GraphKind::ValueNet,
            GraphKind::Inequality,
        ]),
        Some("emission") => Ok(vec![GraphKind::EmissionNet]),
        Some("value") => Ok(vec![GraphKind::ValueNet]),
        Some("inequality") => Ok(vec![GraphKind::Inequality]),
        Some(other) => bail!("--kind expects emission|value|inequality, got {other:?}"),
    }
}

/// EEEI values for one timeframe, keyed by region, from the series file.
fn eeei_for_timeframe(config: &RunConfig, timeframe: &Timeframe) -> Result<BTreeMap<String, f64>> {
    let path = config.out.join("eeei/eeei_series.csv");
    let records = read_eeei_csv(&path)
        .with_context(|| "missing upstream eeei/eeei_series.csv; run the eeei stage first")?;
    let map: BTreeMap<String, f64> = records
        .into_iter()
        .filter(|r| &r.timeframe == timeframe)
        .map(|r| (r.region, r.eeei))
        .collect();
    if map.is_empty() {
        bail!("eeei series has no rows for timeframe {timeframe}");
    }
    Ok(map)
}

fn build_graph(
    config: &RunConfig,
    kind: GraphKind,
    timeframe: &Timeframe,
) -> Result<(TradeGraph, Vec<PathBuf>)> {
    match kind {
        GraphKind::EmissionNet | GraphKind::ValueNet => {
            let flow_kind = if kind == GraphKind::EmissionNet {
                FlowKind::Emission
            } else {
                FlowKind::Value
            };
            let rel = flow_rel(flow_kind, timeframe);
            let path = config.out.join(&rel);
            let flow = read_flow_csv(&path, flow_kind, timeframe.clone())
                .with_context(|| format!("missing upstream {rel}; run the footprint stage first"))?;
            Ok((
                build_net_flow_graph(&flow, config.min_edge_weight),
                vec![path],
            ))
        }
        GraphKind::Inequality => {
            let (e_flow, v_flow) = load_flow_pair(config, timeframe)?;
            let eeei_map = eeei_for_timeframe(config, timeframe)?;
            let eeei: Vec<f64> = e_flow
                .labels
                .iter()
                .map(|label| {
                    eeei_map.get(label).copied().ok_or_else(|| {
                        anyhow!("eeei series lacks region {label} for {timeframe}")
                    })
                })
                .collect::<Result<_>>()?;
            let graph = build_inequality_graph(
                &e_flow,
                &v_flow,
                &eeei,
                config.inequality_rule()?,
                config.inequality.tau,
            )?;
            Ok((
                graph,
                vec![
                    config.out.join(flow_rel(FlowKind::Emission, timeframe)),
                    config.out.join(flow_rel(FlowKind::Value, timeframe)),
                    config.out.join("eeei/eeei_series.csv"),
                ],
            ))
        }
    }
}

/// GEXF exports plus PageRank/clustering metrics per (kind, timeframe).
pub fn cmd_network(
    config: &RunConfig,
    kind_filter: Option<&str>,
    period_filter: Option<&str>,
) -> Result<()> {
    let started = Instant::now();
    let kinds = kind_list(kind_filter)?;
    let frames = timeframes(config, period_filter)?;
    let mut cache = Cache::open(&config.cache_dir());
    let mut report = StageReport::<NetworkReport>::new("network");

    let blob = serde_json::to_string(&(
        &config.pagerank,
        &config.inequality,
        config.min_edge_weight,
        &config.orientation,
    ))?;
    for kind in &kinds {
        for timeframe in &frames {
            let (graph, inputs) = build_graph(config, *kind, timeframe)?;
            graph.validate()?;
            let key = input_key(&inputs, &format!("{blob}|{kind}|{timeframe}"))?;
            let gexf_rel = format!("networks/{kind}_{timeframe}.gexf");
            let metrics_rel = format!("networks/metrics_{kind}_{timeframe}.csv");
            let fresh = [&gexf_rel, &metrics_rel]
                .iter()
                .all(|rel| cache.is_fresh(rel, &key, &config.out.join(rel.as_str())));
            if fresh {
                log("network", format!("{kind}/{timeframe}: cache hit"));
                report.entries.push(NetworkReport {
                    kind: kind.to_string(),
                    timeframe: timeframe.to_string(),
                    nodes: graph.node_count(),
                    edges: graph.edge_count(),
                    pagerank_converged: true,
                    pagerank_iterations: 0,
                    pagerank_residual: 0.0,
                    cache_hit: true,
                });
                continue;
            }

            let pr = pagerank(&graph, config.pagerank_options())?;
            if !pr.converged {
                log(
                    "network",
                    format!(
                        "{kind}/{timeframe}: pagerank did not converge in {} iterations \
                         (residual {:.3e}); scores reported anyway",
                        pr.iterations, pr.residual
                    ),
                );
            }
            let clustering = clustering_coefficients(&graph)?;

            write_cached(&mut cache, &config.out, &gexf_rel, &key, render_gexf(&graph).as_bytes())?;
            let mut rows: Vec<MetricRecord> = graph
                .nodes
                .iter()
                .map(|node| MetricRecord {
                    region: node.id.clone(),
                    timeframe: timeframe.clone(),
                    kind: kind.to_string(),
                    pagerank: pr.scores[&node.id],
                    clustering: clustering.per_node[&node.id],
                })
                .collect();
            let mean_pagerank =
                pr.scores.values().sum::<f64>() / graph.node_count() as f64;
            rows.push(MetricRecord {
                region: NETWORK_ROW.to_string(),
                timeframe: timeframe.clone(),
                kind: kind.to_string(),
                pagerank: mean_pagerank,
                clustering: clustering.network_average,
            });
            write_cached(&mut cache, &config.out, &metrics_rel, &key, &metrics_csv(&rows))?;
            log(
                "network",
                format!(
                    "{kind}/{timeframe}: {} node(s), {} edge(s)",
                    graph.node_count(),
                    graph.edge_count()
                ),
            );
            report.entries.push(NetworkReport {
                kind: kind.to_string(),
                timeframe: timeframe.to_string(),
                nodes: graph.node_count(),
                edges: graph.edge_count(),
                pagerank_converged: pr.converged,
                pagerank_iterations: pr.iterations,
                pagerank_residual: pr.residual,
                cache_hit: false,
            });
        }
    }
    cache.store()?;
    report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    report.write(&config.out)?;
    Ok(())
}

/// Converts a previously written result table between CSV and JSON.
pub fn cmd_export(input: &Path, table: &str, format: &str, to: &Path) -> Result<()> {
    let format: OutputFormat = format.parse::<OutputFormat>()?;
    let table = match table {
        "flows" => {
            let (kind, timeframe) = parse_flow_filename(input)?;
            ResultTable::Flows(read_flow_csv(input, kind, timeframe)?)
        }
        "eeei" => ResultTable::Eeei(read_eeei_csv(input)?),
        "metrics" => ResultTable::Metrics(read_metrics_csv(input)?),
        other => bail!("--table expects flows|eeei|metrics, got {other:?}"),
    };
    if let Some(parent) = to.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_results(&table, to, format)?;
    log("export", format!("{} -> {}", input.display(), to.display()));
    Ok(())
}

/// Kind and timeframe from the `flows_<kind>_<timeframe>.csv` pattern.
fn parse_flow_filename(path: &Path) -> Result<(FlowKind, Timeframe)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let mut parts = stem.splitn(3, '_');
    let (prefix, kind, timeframe) = (parts.next(), parts.next(), parts.next());
    if prefix != Some("flows") {
        bail!(
            "cannot infer kind/timeframe from {}; expected flows_<kind>_<timeframe>.csv",
            path.display()
        );
    }
    let kind: FlowKind = kind
        .ok_or_else(|| anyhow!("missing kind in {}", path.display()))?
        .parse()?;
    let timeframe: Timeframe = timeframe
        .ok_or_else(|| anyhow!("missing timeframe in {}", path.display()))?
        .parse()?;
    Ok((kind, timeframe))
}

/// The full chain: ingest → footprint → eeei → network, then a manifest of
/// every data artifact with its content hash.
pub fn cmd_pipeline(config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let mut stage_wall: Vec<(String, f64)> = Vec::new();
    let mut timed = |name: &str, f: &dyn Fn() -> Result<()>| -> Result<()> {
        let t = Instant::now();
        f().with_context(|| format!("pipeline stage {name} failed"))?;
        stage_wall.push((name.to_string(), t.elapsed().as_secs_f64() * 1e3));
        Ok(())
    };
    timed("ingest", &|| cmd_ingest(config))?;
    timed("footprint", &|| cmd_footprint(config, None))?;
    timed("eeei", &|| cmd_eeei(config))?;
    timed("network", &|| cmd_network(config, None, None))?;

    let manifest_rel = "manifest.json";
    let mut files: Vec<(String, String)> = Vec::new();
    for sub in ["canonical", "flows", "eeei", "networks"] {
        let dir = config.out.join(sub);
        if !dir.is_dir() {
            continue;
        }
        let mut names: Vec<PathBuf> = std::fs::read_dir(&dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        for path in names {
            let rel = format!(
                "{sub}/{}",
                path.file_name().unwrap_or_default().to_string_lossy()
            );
            files.push((rel, hash_file(&path)?));
        }
    }
    let manifest = serde_json::json!({
        "files": files
            .iter()
            .map(|(path, sha256)| serde_json::json!({ "path": path, "sha256": sha256 }))
            .collect::<Vec<_>>(),
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(config.out.join(manifest_rel), bytes)
        .with_context(|| "writing manifest.json")?;

    let mut report = StageReport::<serde_json::Value>::new("pipeline");
    report.entries = stage_wall
        .iter()
        .map(|(name, ms)| serde_json::json!({ "stage": name, "wall_ms": ms }))
        .collect();
    report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    report.write(&config.out)?;
    log(
        "pipeline",
        format!("complete: {} data artifact(s) in manifest", files.len()),
    );
    Ok(())
}
