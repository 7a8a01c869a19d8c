//! End-to-end tests driving the `mrionet` binary on small workspaces:
//! stage behaviour, exit codes, caching, and the CSV/GEXF artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mrionet::export::{read_eeei_csv, read_flow_csv, read_gexf, read_metrics_csv};
use mrionet::footprint::{FlowKind, Timeframe};
use mrionet::network::build_net_flow_graph;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrionet"))
}

fn fixture_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic/config.toml")
}

/// Two regions, one sector each, balanced by construction.
fn write_two_region_workspace(dir: &Path, perturb_x: bool) {
    fs::write(dir.join("index.csv"), "region,sector\nA,s1\nB,s1\n").unwrap();
    fs::write(dir.join("Z_1995.csv"), "1,2\n3,4\n").unwrap();
    fs::write(dir.join("Y_1995.csv"), "5,2\n1,2\n").unwrap();
    fs::write(
        dir.join("ext_1995.csv"),
        "emission,3,4\nvalue_added,5,6\n",
    )
    .unwrap();
    let x0 = if perturb_x { 11.0 } else { 10.0 };
    fs::write(dir.join("x_1995.csv"), format!("{x0}\n10\n")).unwrap();
}

fn run_config(dir: &Path) -> String {
    format!(
        "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
        dir.display(),
        dir.join("out").display()
    )
}

#[test]
fn ingest_valid_workspace_exits_zero_with_clean_report() {
    let dir = tempfile::tempdir().unwrap();
    write_two_region_workspace(dir.path(), false);
    let config = dir.path().join("config.toml");
    fs::write(&config, run_config(dir.path())).unwrap();

    let output = bin().args(["ingest", "--config"]).arg(&config).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let report: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("out/reports/ingest.json")).unwrap(),
    )
    .unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert!(entries[0]["balance_violations"].as_array().unwrap().is_empty());
}

#[test]
fn ingest_perturbed_output_is_soft_warning() {
    let dir = tempfile::tempdir().unwrap();
    write_two_region_workspace(dir.path(), true);
    let config = dir.path().join("config.toml");
    fs::write(&config, run_config(dir.path())).unwrap();

    let output = bin().args(["ingest", "--config"]).arg(&config).output().unwrap();
    assert!(output.status.success());

    let report: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("out/reports/ingest.json")).unwrap(),
    )
    .unwrap();
    let violations = report["entries"][0]["balance_violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0]["index"], 0);
}

#[test]
fn ingest_missing_transactions_file_exits_nonzero_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    write_two_region_workspace(dir.path(), false);
    fs::remove_file(dir.path().join("Z_1995.csv")).unwrap();
    let config = dir.path().join("config.toml");
    fs::write(&config, run_config(dir.path())).unwrap();

    let output = bin().args(["ingest", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("Z_1995.csv"), "{stderr}");
}

#[test]
fn usage_errors_exit_three() {
    let output = bin().args(["network", "--kind", "sideways"]).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    let output = bin().arg("no-such-command").output().unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn singular_system_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("index.csv"), "region,sector\nA,s1\n").unwrap();
    // x = 1 with Z = 1 makes A = 1, so (I - A) is exactly singular.
    fs::write(dir.path().join("Z_1995.csv"), "1\n").unwrap();
    fs::write(dir.path().join("Y_1995.csv"), "0\n").unwrap();
    fs::write(dir.path().join("ext_1995.csv"), "emission,1\nvalue_added,1\n").unwrap();
    let config = dir.path().join("config.toml");
    fs::write(&config, run_config(dir.path())).unwrap();

    let output = bin().args(["footprint", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("condition"), "{stderr}");
}

#[test]
fn footprint_flows_conserve_direct_extensions_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["footprint", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    // Row sums of the emission flow matrix match the direct extension totals.
    let flow = read_flow_csv(
        &out.join("flows/flows_emission_1995.csv"),
        FlowKind::Emission,
        Timeframe::Year(1995),
    )
    .unwrap();
    let ext: Vec<f64> = fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic/ext_1995.csv"),
    )
    .unwrap()
    .lines()
    .next()
    .unwrap()
    .split(',')
    .skip(1)
    .map(|v| v.parse().unwrap())
    .collect();
    // Two sectors per region in the fixture.
    for (r, total) in flow.production_totals().iter().enumerate() {
        let direct = ext[2 * r] + ext[2 * r + 1];
        assert!((total - direct).abs() <= 1e-9 * direct.max(1.0), "region {r}");
    }

    // Periods are entrywise means of the member years.
    let p1 = read_flow_csv(
        &out.join("flows/flows_emission_P1.csv"),
        FlowKind::Emission,
        Timeframe::Period("P1".into()),
    )
    .unwrap();
    let y95 = flow;
    let y96 = read_flow_csv(
        &out.join("flows/flows_emission_1996.csv"),
        FlowKind::Emission,
        Timeframe::Year(1996),
    )
    .unwrap();
    for r in 0..3 {
        for s in 0..3 {
            let mean = (y95.get(r, s) + y96.get(r, s)) / 2.0;
            assert!((p1.get(r, s) - mean).abs() < 1e-12);
        }
    }

    // Cached rerun leaves identical bytes and logs the hit.
    let before = fs::read(out.join("flows/flows_emission_1995.csv")).unwrap();
    let output = bin()
        .args(["footprint", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("cache hit"));
    let after = fs::read(out.join("flows/flows_emission_1995.csv")).unwrap();
    assert_eq!(before, after);
}

/// Flow pair whose region A uniquely minimizes e_net and maximizes v_net.
fn write_structural_flows(out: &Path, timeframe: &str, scale: f64) {
    fs::create_dir_all(out.join("flows")).unwrap();
    let e = format!(
        "region,A,B,C\nA,0,{},{}\nB,{},0,{}\nC,{},{},0\n",
        1.0 * scale,
        1.0 * scale,
        9.0 * scale,
        1.0 * scale,
        9.0 * scale,
        1.0 * scale
    );
    let v = format!(
        "region,A,B,C\nA,0,{},{}\nB,{},0,{}\nC,{},{},0\n",
        9.0 * scale,
        9.0 * scale,
        1.0 * scale,
        1.0 * scale,
        1.0 * scale,
        1.0 * scale
    );
    fs::write(out.join(format!("flows/flows_emission_{timeframe}.csv")), e).unwrap();
    fs::write(out.join(format!("flows/flows_value_{timeframe}.csv")), v).unwrap();
}

#[test]
fn eeei_structural_analogue_scores_one_in_every_timeframe() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // Years 1995-1996 with yearly rescaled flows: min-max absorbs the scale.
    write_structural_flows(&out, "1995", 1.0);
    write_structural_flows(&out, "1996", 7.5);
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1996\n",
            dir.path().display(),
            out.display()
        ),
    )
    .unwrap();
    let status = bin().args(["eeei", "--config"]).arg(&config).status().unwrap();
    assert!(status.success());

    let records = read_eeei_csv(&out.join("eeei/eeei_series.csv")).unwrap();
    assert_eq!(records.len(), 6);
    for rec in records.iter().filter(|r| r.region == "A") {
        assert_eq!(rec.eeei, 1.0, "timeframe {}", rec.timeframe);
    }

    // Distances recomputed from the series equal the emitted matrices.
    for timeframe in ["1995", "1996"] {
        let frame: Vec<_> = records
            .iter()
            .filter(|r| r.timeframe.to_string() == timeframe)
            .collect();
        let emitted = read_flow_csv(
            &out.join(format!("eeei/distance_{timeframe}.csv")),
            FlowKind::Emission,
            Timeframe::Year(1995),
        )
        .unwrap();
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                assert!((emitted.get(i, j) - (a.eeei - b.eeei).abs()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn eeei_two_region_system_hits_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("flows")).unwrap();
    fs::write(
        out.join("flows/flows_emission_1995.csv"),
        "region,A,B\nA,0,5\nB,2,0\n",
    )
    .unwrap();
    fs::write(
        out.join("flows/flows_value_1995.csv"),
        "region,A,B\nA,0,1\nB,4,0\n",
    )
    .unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
            dir.path().display(),
            out.display()
        ),
    )
    .unwrap();
    assert!(bin().args(["eeei", "--config"]).arg(&config).status().unwrap().success());
    let records = read_eeei_csv(&out.join("eeei/eeei_series.csv")).unwrap();
    let mut values: Vec<f64> = records.iter().map(|r| r.eeei).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(values, vec![-1.0, 1.0]);
}

#[test]
fn network_symmetric_flows_give_empty_graph_and_zero_clustering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("flows")).unwrap();
    let symmetric = "region,A,B,C\nA,7,1,2\nB,1,8,3\nC,2,3,9\n";
    fs::write(out.join("flows/flows_emission_1995.csv"), symmetric).unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
            dir.path().display(),
            out.display()
        ),
    )
    .unwrap();
    let status = bin()
        .args(["network", "--kind", "emission", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());

    let import = read_gexf(&out.join("networks/emission_net_1995.gexf")).unwrap();
    assert_eq!(import.graph.node_count(), 3);
    assert_eq!(import.graph.edge_count(), 0);

    let metrics = read_metrics_csv(&out.join("networks/metrics_emission_net_1995.csv")).unwrap();
    let avg = metrics.iter().find(|m| m.region == "__network__").unwrap();
    assert_eq!(avg.clustering, 0.0);
}

#[test]
fn network_canonical_inequality_edge_points_at_beneficiary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("flows")).unwrap();
    fs::write(
        out.join("flows/flows_emission_1995.csv"),
        "region,A,B\nA,0,10\nB,0,0\n",
    )
    .unwrap();
    fs::write(
        out.join("flows/flows_value_1995.csv"),
        "region,A,B\nA,0,0\nB,10,0\n",
    )
    .unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
            dir.path().display(),
            out.display()
        ),
    )
    .unwrap();
    assert!(bin().args(["eeei", "--config"]).arg(&config).status().unwrap().success());
    let status = bin()
        .args(["network", "--kind", "inequality", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());

    let graph = read_gexf(&out.join("networks/inequality_1995.gexf")).unwrap().graph;
    assert_eq!(graph.edge_count(), 1);
    let edge = &graph.edges[0];
    assert_eq!(graph.nodes[edge.source].id, "A");
    assert_eq!(graph.nodes[edge.target].id, "B");
}

#[test]
fn network_pagerank_matches_independent_power_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("flows")).unwrap();
    // 13-region random flow matrix, fixed seed.
    let mut rng = mrionet::synthetic::Rng64::new(97);
    let labels: Vec<String> = (0..13).map(|i| format!("R{i:02}")).collect();
    let mut csv = String::from("region");
    for l in &labels {
        csv.push(',');
        csv.push_str(l);
    }
    csv.push('\n');
    let mut values = vec![vec![0.0f64; 13]; 13];
    for (r, label) in labels.iter().enumerate() {
        csv.push_str(label);
        for value in values[r].iter_mut() {
            *value = (rng.next_f64() * 100.0 * 8.0).round() / 8.0;
            csv.push_str(&format!(",{value}"));
        }
        csv.push('\n');
    }
    fs::write(out.join("flows/flows_emission_1995.csv"), &csv).unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
            dir.path().display(),
            out.display()
        ),
    )
    .unwrap();
    let status = bin()
        .args(["network", "--kind", "emission", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());

    let metrics = read_metrics_csv(&out.join("networks/metrics_emission_net_1995.csv")).unwrap();
    let flow = read_flow_csv(
        &out.join("flows/flows_emission_1995.csv"),
        FlowKind::Emission,
        Timeframe::Year(1995),
    )
    .unwrap();
    let graph = build_net_flow_graph(&flow, 0.0);

    // Dense power iteration, written independently of the library path.
    let n = graph.node_count();
    let d = 0.85;
    let mut w = vec![vec![0.0; n]; n];
    for e in &graph.edges {
        w[e.source][e.target] += e.weight;
    }
    let out_w: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..500 {
        let dangling: f64 = (0..n).filter(|&j| out_w[j] <= 0.0).map(|j| p[j]).sum();
        let mut next = vec![(1.0 - d) / n as f64 + d * dangling / n as f64; n];
        for j in 0..n {
            if out_w[j] > 0.0 {
                for i in 0..n {
                    next[i] += d * p[j] * w[j][i] / out_w[j];
                }
            }
        }
        p = next;
    }
    for (i, node) in graph.nodes.iter().enumerate() {
        let row = metrics.iter().find(|m| m.region == node.id).unwrap();
        assert!(
            (row.pagerank - p[i]).abs() < 1e-8,
            "{}: {} vs {}",
            node.id,
            row.pagerank,
            p[i]
        );
    }
}

#[test]
fn pipeline_regenerates_only_deleted_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = || {
        bin()
            .args(["pipeline", "--config"])
            .arg(fixture_config())
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    let victim = out.join("networks/emission_net_1996.gexf");
    let sibling = out.join("networks/emission_net_1995.gexf");
    let sibling_mtime = fs::metadata(&sibling).unwrap().modified().unwrap();
    fs::remove_file(&victim).unwrap();

    let output = run();
    assert!(output.status.success());
    assert!(victim.exists());
    // Untouched sibling was a cache hit: same mtime, and the log says so.
    assert_eq!(fs::metadata(&sibling).unwrap().modified().unwrap(), sibling_mtime);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("cache hit"));
}

#[test]
fn pipeline_orientation_flag_negates_eeei_column() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out, orientation) in [(&out_a, "advantage_high"), (&out_b, "literal_eq8")] {
        let status = bin()
            .args(["pipeline", "--config"])
            .arg(fixture_config())
            .arg("--out")
            .arg(out)
            .args(["--orientation", orientation])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let high = read_eeei_csv(&out_a.join("eeei/eeei_series.csv")).unwrap();
    let literal = read_eeei_csv(&out_b.join("eeei/eeei_series.csv")).unwrap();
    assert_eq!(high.len(), literal.len());
    for (a, b) in high.iter().zip(&literal) {
        assert_eq!(a.region, b.region);
        assert!((a.eeei + b.eeei).abs() < 1e-12);
    }
}

#[test]
fn export_converts_tables_to_json_with_identical_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["pipeline", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let input = out.join("eeei/eeei_series.csv");
    let to = dir.path().join("eeei.json");
    let status = bin()
        .args(["export", "--table", "eeei", "--format", "json", "--input"])
        .arg(&input)
        .arg("--to")
        .arg(&to)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&to).unwrap()).unwrap();
    let records = read_eeei_csv(&input).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(&records) {
        assert_eq!(row["region"].as_str().unwrap(), rec.region);
        assert_eq!(row["eeei"].as_f64().unwrap(), rec.eeei);
    }

    // Flow tables infer kind and timeframe from the filename.
    let input = out.join("flows/flows_value_P2.csv");
    let to = dir.path().join("flows_value_P2.json");
    assert!(bin()
        .args(["export", "--table", "flows", "--format", "json", "--input"])
        .arg(&input)
        .arg("--to")
        .arg(&to)
        .status()
        .unwrap()
        .success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&to).unwrap()).unwrap();
    let flow = read_flow_csv(&input, FlowKind::Value, Timeframe::Period("P2".into())).unwrap();
    assert_eq!(
        json[0]["RA"].as_f64().unwrap(),
        flow.get(0, 0)
    );
}

#[test]
fn footprint_without_upstream_canonical_data_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        format!(
            "workspace = \"{}\"\nformat = \"exiobase_ixi\"\nout = \"{}\"\n[years]\nstart = 1995\nend = 1995\n",
            dir.path().display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let output = bin().args(["footprint", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("ingest"));
}

#[test]
fn parallel_year_solves_match_serial_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out_serial = dir.path().join("serial");
    let out_parallel = dir.path().join("parallel");
    for (out, jobs) in [(&out_serial, "1"), (&out_parallel, "3")] {
        let status = bin()
            .args(["footprint", "--config"])
            .arg(fixture_config())
            .arg("--out")
            .arg(out)
            .args(["--jobs", jobs])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for year in 1995..=1998 {
        for kind in ["emission", "value"] {
            let rel = format!("flows/flows_{kind}_{year}.csv");
            assert_eq!(
                fs::read(out_serial.join(&rel)).unwrap(),
                fs::read(out_parallel.join(&rel)).unwrap(),
                "{rel} differs between serial and parallel runs"
            );
        }
    }
}

#[test]
fn cache_dir_env_variable_overrides_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("elsewhere");
    let status = bin()
        .args(["footprint", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(&out)
        .env("MRIONET_CACHE_DIR", &cache)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(cache.join("manifest.json").exists());
    assert!(!out.join(".cache").exists());

    // The relocated cache still produces hits.
    let output = bin()
        .args(["footprint", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(&out)
        .env("MRIONET_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&output.stderr).contains("cache hit"));
}
