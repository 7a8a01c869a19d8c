//! Run configuration: a TOML file in which every value can be overridden on
//! the command line by its dotted key (`--set pagerank.damping=0.9`), plus
//! named flags for the common selectors.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use mrionet::footprint::{Period, PeriodMode};
use mrionet::ingest::ParseOptions;
use mrionet::network::{InequalityRule, PageRankOptions};
use mrionet::schema::AggregationMap;
use mrionet::{MrioFormat, Orientation};

/// Sentinel accepted in `aggregation_map` for the builtin 13-region scheme.
pub const BUILTIN_EXIOBASE_13: &str = "builtin:exiobase13";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearRange {
    pub start: u16,
    pub end: u16,
}

impl Default for YearRange {
    fn default() -> Self {
        YearRange {
            start: 1995,
            end: 2022,
        }
    }
}

impl YearRange {
    pub fn iter(&self) -> impl Iterator<Item = u16> {
        self.start..=self.end
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    pub label: String,
    pub start_year: u16,
    pub end_year: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalityConfig {
    pub rule: String,
    pub tau: f64,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        InequalityConfig {
            rule: "strict_mismatch".to_string(),
            tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

fn default_format() -> String {
    "canonical_csv".to_string()
}

fn default_period_mode() -> String {
    "mean".to_string()
}

fn default_orientation() -> String {
    "advantage_high".to_string()
}

fn default_epsilon_balance() -> f64 {
    1e-6
}

fn default_epsilon_x() -> f64 {
    1e-9
}

fn default_rcond_threshold() -> f64 {
    1e-13
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding the raw tables.
    pub workspace: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
    /// Output directory for every artifact of the run.
    pub out: PathBuf,
    #[serde(default)]
    pub years: YearRange,
    /// Defaults to the four study periods when omitted.
    #[serde(default)]
    pub periods: Vec<PeriodConfig>,
    /// Path to a native→aggregated CSV, the builtin sentinel, or omitted for
    /// no aggregation (flows stay at native region resolution).
    #[serde(default)]
    pub aggregation_map: Option<String>,
    /// Extension rows summed into the emission account; empty = layout default.
    #[serde(default)]
    pub emission_accounts: Vec<String>,
    /// Extension rows summed into the value-added account; empty = layout default.
    #[serde(default)]
    pub value_accounts: Vec<String>,
    #[serde(default = "default_orientation")]
    pub orientation: String,
    #[serde(default = "default_period_mode")]
    pub period_mode: String,
    #[serde(default)]
    pub min_edge_weight: f64,
    #[serde(default = "default_epsilon_balance")]
    pub epsilon_balance: f64,
    #[serde(default = "default_epsilon_x")]
    pub epsilon_x: f64,
    #[serde(default = "default_rcond_threshold")]
    pub rcond_threshold: f64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Cache directory; defaults to `<out>/.cache`, overridable by the
    /// `MRIONET_CACHE_DIR` environment variable.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub inequality: InequalityConfig,
    #[serde(default)]
    pub pagerank: PageRankConfig,
}

/// Named command-line overrides collected by the CLI layer.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub workspace: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub years: Option<String>,
    pub orientation: Option<String>,
    pub jobs: Option<usize>,
    pub set: Vec<String>,
}

impl RunConfig {
    /// Loads the TOML file (when given), layers dotted `--set` overrides and
    /// named flags on top, resolves relative paths, and validates.
    pub fn load(config_path: Option<&Path>, overrides: &CliOverrides) -> Result<RunConfig> {
        let mut table = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                text.parse::<toml::Table>()
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => toml::Table::new(),
        };

        if let Some(ws) = &overrides.workspace {
            set_dotted(&mut table, "workspace", toml::Value::String(ws.display().to_string()))?;
        }
        if let Some(out) = &overrides.out {
            set_dotted(&mut table, "out", toml::Value::String(out.display().to_string()))?;
        }
        if let Some(years) = &overrides.years {
            let (start, end) = parse_year_range(years)?;
            set_dotted(&mut table, "years.start", toml::Value::Integer(start as i64))?;
            set_dotted(&mut table, "years.end", toml::Value::Integer(end as i64))?;
        }
        if let Some(orientation) = &overrides.orientation {
            set_dotted(
                &mut table,
                "orientation",
                toml::Value::String(orientation.clone()),
            )?;
        }
        if let Some(jobs) = overrides.jobs {
            set_dotted(&mut table, "jobs", toml::Value::Integer(jobs as i64))?;
        }
        for pair in &overrides.set {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {pair:?}"))?;
            set_dotted(&mut table, key.trim(), parse_toml_scalar(raw))?;
        }

        let mut config: RunConfig = toml::Value::Table(table)
            .try_into()
            .context("config does not match the expected schema")?;

        // Relative paths are anchored at the config file's directory; flags
        // and bare runs resolve against the working directory.
        let anchor = config_path.and_then(Path::parent);
        let flagged_ws = overrides.workspace.is_some();
        let flagged_out = overrides.out.is_some();
        if let Some(base) = anchor {
            if !flagged_ws {
                config.workspace = resolve(base, &config.workspace);
            }
            if !flagged_out {
                config.out = resolve(base, &config.out);
            }
            if let Some(map) = &config.aggregation_map {
                if map != BUILTIN_EXIOBASE_13 {
                    let p = PathBuf::from(map);
                    if p.is_relative() {
                        config.aggregation_map =
                            Some(base.join(p).display().to_string());
                    }
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.mrio_format()?;
        self.orientation_enum()?;
        self.period_mode_enum()?;
        self.inequality_rule()?;
        if self.years.start > self.years.end {
            bail!(
                "years.start {} is after years.end {}",
                self.years.start,
                self.years.end
            );
        }
        for bound in [self.years.start, self.years.end] {
            if !(1995..=2022).contains(&bound) {
                bail!("year {bound} outside the supported range 1995-2022");
            }
        }
        for period in self.periods() {
            // Numeric labels would collide with per-year artifact names.
            if period.label.parse::<u16>().is_ok() {
                bail!(
                    "period label {:?} looks like a year; pick a non-numeric label",
                    period.label
                );
            }
            for year in period.years() {
                if year < self.years.start || year > self.years.end {
                    bail!(
                        "period {} needs year {year}, outside the configured range {}..{}",
                        period.label,
                        self.years.start,
                        self.years.end
                    );
                }
            }
        }
        if !(self.pagerank.damping > 0.0 && self.pagerank.damping < 1.0) {
            bail!("pagerank.damping must lie in (0,1)");
        }
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        if let Some(map) = &self.aggregation_map {
            if map != BUILTIN_EXIOBASE_13 && !Path::new(map).exists() {
                bail!("aggregation map {map} does not exist");
            }
        }
        Ok(())
    }

    pub fn mrio_format(&self) -> Result<MrioFormat> {
        Ok(self.format.parse::<MrioFormat>()?)
    }

    pub fn orientation_enum(&self) -> Result<Orientation> {
        Ok(self.orientation.parse::<Orientation>()?)
    }

    pub fn period_mode_enum(&self) -> Result<PeriodMode> {
        match self.period_mode.as_str() {
            "mean" => Ok(PeriodMode::Mean),
            "sum" => Ok(PeriodMode::Sum),
            other => bail!("unknown period_mode {other:?}"),
        }
    }

    pub fn inequality_rule(&self) -> Result<InequalityRule> {
        Ok(self.inequality.rule.parse::<InequalityRule>()?)
    }

    /// Configured periods, or the four default study periods restricted to
    /// the configured year range (periods outside the range are dropped).
    pub fn periods(&self) -> Vec<Period> {
        let mode = self.period_mode_enum().unwrap_or_default();
        if self.periods.is_empty() {
            return Period::default_periods()
                .into_iter()
                .filter(|p| p.start_year >= self.years.start && p.end_year <= self.years.end)
                .map(|p| p.with_mode(mode))
                .collect();
        }
        self.periods
            .iter()
            .map(|p| {
                Period::new(p.label.clone(), p.start_year, p.end_year)
                    .expect("validated period")
                    .with_mode(mode)
            })
            .collect()
    }

    pub fn parse_options(&self) -> Result<ParseOptions> {
        let format = self.mrio_format()?;
        let defaults = ParseOptions::defaults_for(format);
        Ok(ParseOptions {
            emission_accounts: if self.emission_accounts.is_empty() {
                defaults.emission_accounts
            } else {
                self.emission_accounts.clone()
            },
            value_accounts: if self.value_accounts.is_empty() {
                defaults.value_accounts
            } else {
                self.value_accounts.clone()
            },
        })
    }

    pub fn pagerank_options(&self) -> PageRankOptions {
        PageRankOptions {
            damping: self.pagerank.damping,
            tol: self.pagerank.tol,
            max_iter: self.pagerank.max_iter,
        }
    }

    /// Loads the aggregation map, if any.
    pub fn aggregation(&self) -> Result<Option<AggregationMap>> {
        match &self.aggregation_map {
            None => Ok(None),
            Some(sentinel) if sentinel == BUILTIN_EXIOBASE_13 => {
                Ok(Some(AggregationMap::exiobase_13()))
            }
            Some(path) => Ok(Some(AggregationMap::from_csv_path(Path::new(path))?)),
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        if let Ok(env_dir) = std::env::var("MRIONET_CACHE_DIR") {
            if !env_dir.is_empty() {
                return PathBuf::from(env_dir);
            }
        }
        self.cache_dir
            .clone()
            .unwrap_or_else(|| self.out.join(".cache"))
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

pub fn parse_year_range(text: &str) -> Result<(u16, u16)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("--years expects A..B, got {text:?}"))?;
    let start: u16 = a.trim().parse().context("--years start")?;
    let end: u16 = b.trim().trim_start_matches('=').parse().context("--years end")?;
    Ok((start, end))
}

/// Best-effort scalar parse: TOML literal when valid, string otherwise.
fn parse_toml_scalar(raw: &str) -> toml::Value {
    let attempt = format!("v = {raw}");
    if let Ok(table) = attempt.parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.trim().to_string())
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("config key {key:?} descends into a non-table value"))?;
    }
    Ok(())
}
