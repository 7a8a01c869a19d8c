//! Trade network construction and metrics: net emission / net value-added
//! graphs, the EEEI-based carbon inequality graph, PageRank centrality, and
//! intensity-based weighted clustering coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equality::minmax_scale;
use crate::error::{Error, Result};
use crate::footprint::{FlowKind, RegionFlowMatrix, Timeframe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    EmissionNet,
    ValueNet,
    Inequality,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::EmissionNet => "emission_net",
            GraphKind::ValueNet => "value_net",
            GraphKind::Inequality => "inequality",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emission_net" => Ok(GraphKind::EmissionNet),
            "value_net" => Ok(GraphKind::ValueNet),
            "inequality" => Ok(GraphKind::Inequality),
            other => Err(Error::InvalidInput(format!("unknown graph kind {other:?}"))),
        }
    }
}

/// Edge emission rule for the inequality graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityRule {
    /// Emit r→s exactly when r net-exports emission burden to s while
    /// net-losing value to s; the target is the beneficiary.
    #[default]
    StrictMismatch,
    /// Emit every ordered pair whose mismatch score exceeds tau.
    ScoreThreshold,
}

impl fmt::Display for InequalityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityRule::StrictMismatch => "strict_mismatch",
            InequalityRule::ScoreThreshold => "score_threshold",
        })
    }
}

impl FromStr for InequalityRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict_mismatch" => Ok(InequalityRule::StrictMismatch),
            "score_threshold" => Ok(InequalityRule::ScoreThreshold),
            other => Err(Error::InvalidInput(format!(
                "unknown inequality rule {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: String,
    /// Domestic (diagonal) footprint for net-flow graphs.
    pub domestic: Option<f64>,
    /// Regional EEEI for inequality graphs.
    pub eeei: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    /// Underlying bilateral emission delta (Mt) for inequality edges.
    pub raw_delta_e: Option<f64>,
    /// Underlying bilateral value delta (M.EUR) for inequality edges.
    pub raw_delta_v: Option<f64>,
}

/// Directed weighted trade graph, immutable after build.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeGraph {
    pub kind: GraphKind,
    pub timeframe: Timeframe,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    /// Build rule and thresholds, recorded for exports.
    pub rule: String,
    /// Plain-language statement of what an edge direction means.
    pub direction_semantics: String,
}

impl TradeGraph {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Structural invariants: unique ids, valid endpoints, no self-loops,
    /// one direction per pair and positive weights for net-flow kinds,
    /// weights within [-1, 1] for inequality.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(Error::DuplicateLabel {
                    kind: "graph node",
                    label: node.id.clone(),
                });
            }
        }
        let mut pairs = BTreeSet::new();
        for edge in &self.edges {
            if edge.source >= self.nodes.len() || edge.target >= self.nodes.len() {
                return Err(Error::InvalidInput(format!(
                    "edge endpoint index out of range: {} -> {}",
                    edge.source, edge.target
                )));
            }
            if edge.source == edge.target {
                return Err(Error::InvalidInput(format!(
                    "self-loop on node {}",
                    self.nodes[edge.source].id
                )));
            }
            match self.kind {
                GraphKind::EmissionNet | GraphKind::ValueNet => {
                    if edge.weight <= 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "net-flow edge weight must be positive, got {}",
                            edge.weight
                        )));
                    }
                    let key = (edge.source.min(edge.target), edge.source.max(edge.target));
                    if !pairs.insert(key) {
                        return Err(Error::InvalidInput(format!(
                            "both directions present between {} and {}",
                            self.nodes[key.0].id, self.nodes[key.1].id
                        )));
                    }
                }
                GraphKind::Inequality => {
                    if !(-1.0..=1.0).contains(&edge.weight) {
                        return Err(Error::InvalidInput(format!(
                            "inequality edge weight outside [-1,1]: {}",
                            edge.weight
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn sort_edges(&mut self) {
        let ids: Vec<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        self.edges.sort_by(|a, b| {
            (ids[a.source], ids[a.target]).cmp(&(ids[b.source], ids[b.target]))
        });
    }
}

const NET_FLOW_DIRECTION: &str = "source region hosts the excess footprint embodied in the \
bilateral trade and net-exports it to the target region whose final demand it serves";
const INEQUALITY_DIRECTION: &str =
    "target region is the beneficiary of the unequal bilateral trade";

/// Net-flow graph over one flow matrix: node r carries the domestic
/// footprint F(r,r); for each unordered pair the bilateral delta
/// `Δ = F(r,s) − F(s,r)` yields one edge in the direction of the net
/// exporter when `Δ > min_weight`, and no edge when `|Δ| ≤ min_weight`.
pub fn build_net_flow_graph(flow: &RegionFlowMatrix, min_weight: f64) -> TradeGraph {
    let kind = match flow.kind {
        FlowKind::Emission => GraphKind::EmissionNet,
        FlowKind::Value => GraphKind::ValueNet,
    };
    let m = flow.region_count();
    let nodes: Vec<GraphNode> = flow
        .labels
        .iter()
        .enumerate()
        .map(|(r, label)| GraphNode {
            id: label.clone(),
            domestic: Some(flow.get(r, r)),
            eeei: None,
        })
        .collect();
    let mut edges = Vec::new();
    for r in 0..m {
        for s in (r + 1)..m {
            let delta = flow.get(r, s) - flow.get(s, r);
            if delta > min_weight {
                edges.push(GraphEdge {
                    source: r,
                    target: s,
                    weight: delta,
                    raw_delta_e: None,
                    raw_delta_v: None,
                });
            } else if -delta > min_weight {
                edges.push(GraphEdge {
                    source: s,
                    target: r,
                    weight: -delta,
                    raw_delta_e: None,
                    raw_delta_v: None,
                });
            }
        }
    }
    let mut graph = TradeGraph {
        kind,
        timeframe: flow.timeframe.clone(),
        nodes,
        edges,
        rule: format!("net_flow; min_weight={min_weight}"),
        direction_semantics: NET_FLOW_DIRECTION.to_string(),
    };
    graph.sort_edges();
    graph
}

/// Carbon inequality graph. For each ordered pair the mismatch score is
/// `g_E(Δe) − g_V(Δv)`, where `g_E`/`g_V` min-max the ordered-pair deltas of
/// this timeframe. Under `strict_mismatch`, r→s is emitted exactly when
/// `Δe > 0 ∧ Δv < 0`; under `score_threshold`, when the score exceeds tau.
/// Emitted scores are rescaled once more so weights span [-1, 1].
pub fn build_inequality_graph(
    e_flow: &RegionFlowMatrix,
    v_flow: &RegionFlowMatrix,
    eeei: &[f64],
    rule: InequalityRule,
    tau: f64,
) -> Result<TradeGraph> {
    if e_flow.labels != v_flow.labels {
        return Err(Error::LabelMismatch {
            context: "inequality graph".into(),
            detail: "emission and value flow labels differ".into(),
        });
    }
    if eeei.len() != e_flow.region_count() {
        return Err(Error::DimensionMismatch {
            context: "eeei vector vs flow labels".into(),
            expected: e_flow.region_count(),
            found: eeei.len(),
        });
    }
    if rule == InequalityRule::ScoreThreshold && !(-1.0..=1.0).contains(&tau) {
        return Err(Error::InvalidInput(format!(
            "tau must lie in [-1,1] under score_threshold, got {tau}"
        )));
    }

    let m = e_flow.region_count();
    let mut de = vec![0.0; m * m];
    let mut dv = vec![0.0; m * m];
    let mut ordered_de = Vec::with_capacity(m * (m - 1));
    let mut ordered_dv = Vec::with_capacity(m * (m - 1));
    for r in 0..m {
        for s in 0..m {
            if r == s {
                continue;
            }
            de[r * m + s] = e_flow.get(r, s) - e_flow.get(s, r);
            dv[r * m + s] = v_flow.get(r, s) - v_flow.get(s, r);
            ordered_de.push(de[r * m + s]);
            ordered_dv.push(dv[r * m + s]);
        }
    }
    let g_e = minmax_scale(&ordered_de);
    let g_v = minmax_scale(&ordered_dv);
    let mut score = vec![0.0; m * m];
    let mut k = 0;
    for r in 0..m {
        for s in 0..m {
            if r == s {
                continue;
            }
            score[r * m + s] = g_e[k] - g_v[k];
            k += 1;
        }
    }

    let mut emitted: Vec<(usize, usize)> = Vec::new();
    for r in 0..m {
        for s in 0..m {
            if r == s {
                continue;
            }
            let hit = match rule {
                InequalityRule::StrictMismatch => de[r * m + s] > 0.0 && dv[r * m + s] < 0.0,
                InequalityRule::ScoreThreshold => score[r * m + s] > tau,
            };
            if hit {
                emitted.push((r, s));
            }
        }
    }
    let weights = minmax_scale(
        &emitted
            .iter()
            .map(|&(r, s)| score[r * m + s])
            .collect::<Vec<_>>(),
    );
    let edges: Vec<GraphEdge> = emitted
        .iter()
        .zip(&weights)
        .map(|(&(r, s), &w)| GraphEdge {
            source: r,
            target: s,
            weight: w,
            raw_delta_e: Some(de[r * m + s]),
            raw_delta_v: Some(dv[r * m + s]),
        })
        .collect();

    let nodes: Vec<GraphNode> = e_flow
        .labels
        .iter()
        .zip(eeei)
        .map(|(label, &value)| GraphNode {
            id: label.clone(),
            domestic: None,
            eeei: Some(value),
        })
        .collect();
    let mut graph = TradeGraph {
        kind: GraphKind::Inequality,
        timeframe: e_flow.timeframe.clone(),
        nodes,
        edges,
        rule: match rule {
            InequalityRule::StrictMismatch => "strict_mismatch".to_string(),
            InequalityRule::ScoreThreshold => format!("score_threshold; tau={tau}"),
        },
        direction_semantics: INEQUALITY_DIRECTION.to_string(),
    };
    graph.sort_edges();
    graph.validate()?;
    Ok(graph)
}

#[derive(Debug, Clone, Copy)]
pub struct PageRankOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PageRankResult {
    pub scores: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
    /// L1 change of the final iteration.
    pub residual: f64,
}

/// Damped random-walk scores over out-weight-normalized edges; edge weights
/// enter as absolute values so inequality graphs are handled uniformly.
/// Dangling mass is redistributed uniformly. A non-converged run still
/// returns its final vector, flagged in the result.
pub fn pagerank(graph: &TradeGraph, opts: PageRankOptions) -> Result<PageRankResult> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::InvalidInput("pagerank needs at least one node".into()));
    }
    if !(opts.damping > 0.0 && opts.damping < 1.0) {
        return Err(Error::InvalidInput(format!(
            "damping must lie in (0,1), got {}",
            opts.damping
        )));
    }
    let d = opts.damping;
    let mut out_weight = vec![0.0; n];
    for edge in &graph.edges {
        out_weight[edge.source] += edge.weight.abs();
    }

    let mut p = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut next = vec![(1.0 - d) / n as f64; n];
        let mut dangling = 0.0;
        for (i, &w) in out_weight.iter().enumerate() {
            if w <= 0.0 {
                dangling += p[i];
            }
        }
        let dangling_share = d * dangling / n as f64;
        for v in next.iter_mut() {
            *v += dangling_share;
        }
        for edge in &graph.edges {
            let w = edge.weight.abs();
            if w > 0.0 {
                next[edge.target] += d * p[edge.source] * w / out_weight[edge.source];
            }
        }
        residual = p
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        p = next;
        iterations += 1;
        if residual < opts.tol {
            converged = true;
            break;
        }
    }
    let scores = graph
        .nodes
        .iter()
        .zip(&p)
        .map(|(node, &score)| (node.id.clone(), score))
        .collect();
    Ok(PageRankResult {
        scores,
        iterations,
        converged,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub per_node: BTreeMap<String, f64>,
    /// Mean over nodes with degree ≥ 2 in the undirected projection; 0 when
    /// no node qualifies.
    pub network_average: f64,
}

/// Intensity-based weighted clustering on the undirected projection.
/// Reciprocal directed edges are summed; weights enter as absolute values
/// and are normalized by the graph-wide maximum, so
/// `C_i = (1/(k_i(k_i−1))) Σ_{j≠h} (ŵ_ij ŵ_ih ŵ_jh)^{1/3}` lies in [0, 1].
pub fn clustering_coefficients(graph: &TradeGraph) -> Result<ClusteringResult> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::InvalidInput(
            "clustering needs at least one node".into(),
        ));
    }
    let mut und: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for edge in &graph.edges {
        let key = (edge.source.min(edge.target), edge.source.max(edge.target));
        *und.entry(key).or_insert(0.0) += edge.weight.abs();
    }
    let w_max = und.values().fold(0.0f64, |acc, w| acc.max(*w));

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut norm: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(a, b), &w) in &und {
        neighbors[a].push(b);
        neighbors[b].push(a);
        norm.insert((a, b), if w_max > 0.0 { w / w_max } else { 0.0 });
    }
    let weight_of = |a: usize, b: usize| -> f64 {
        let key = (a.min(b), a.max(b));
        norm.get(&key).copied().unwrap_or(0.0)
    };

    let mut per_node = BTreeMap::new();
    let mut eligible = 0usize;
    let mut total = 0.0;
    for (i, node) in graph.nodes.iter().enumerate() {
        let nbrs = &neighbors[i];
        let k = nbrs.len();
        let c = if k < 2 {
            0.0
        } else {
            let mut acc = 0.0;
            for (a_idx, &j) in nbrs.iter().enumerate() {
                for &h in &nbrs[a_idx + 1..] {
                    let w_jh = weight_of(j, h);
                    if w_jh > 0.0 {
                        acc += (weight_of(i, j) * weight_of(i, h) * w_jh).cbrt();
                    }
                }
            }
            2.0 * acc / (k as f64 * (k - 1) as f64)
        };
        if k >= 2 {
            eligible += 1;
            total += c;
        }
        per_node.insert(node.id.clone(), c);
    }
    Ok(ClusteringResult {
        per_node,
        network_average: if eligible > 0 {
            total / eligible as f64
        } else {
            0.0
        },
    })
}
