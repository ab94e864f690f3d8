//! Scenario files: a versioned TOML schema describing the grid, cost
//! model, profiles, device clusters, forecast noise and run settings.

use anyhow::{bail, Context, Result};
use fmbc_core::PolicyVariant;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub grid: GridConfig,
    pub cost: CostConfig,
    pub load: ProfileSource,
    pub wind: ProfileSource,
    pub clusters: Vec<ClusterConfig>,
    pub forecast: ForecastConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Clock time of step 0, "HH:MM".
    pub start_time: String,
    pub steps: usize,
    pub step_minutes: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    /// Affine marginal cost: price = generation / k (kW^2*min units).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Piecewise-linear marginal cost as (generation_kw, price) breakpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSource {
    Csv { path: String },
    Synthetic { peak_kw: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub count: usize,
    pub duration_steps: usize,
    pub power_kw: f64,
    /// Mean deadline as a clock time (wraps past midnight relative to the
    /// grid start).
    pub deadline_time: String,
    pub deadline_sd_minutes: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    /// Relative price uncertainty at 24-hour lead time.
    pub nu_24h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "mdp", "point-forecast", "naive" or "latest-start".
    pub policy: String,
    pub base_seed: u64,
    pub replications: u32,
}

pub fn parse_clock(s: &str) -> Result<f64> {
    let (h, m) = s
        .split_once(':')
        .with_context(|| format!("clock time {s:?} is not HH:MM"))?;
    let h: u32 = h.parse().with_context(|| format!("bad hour in {s:?}"))?;
    let m: u32 = m.parse().with_context(|| format!("bad minute in {s:?}"))?;
    if h >= 24 || m >= 60 {
        bail!("clock time {s:?} out of range");
    }
    Ok(f64::from(h * 60 + m))
}

pub fn parse_policy(name: &str) -> Result<PolicyVariant> {
    Ok(match name {
        "mdp" | "fmbc" => PolicyVariant::MdpOptimal,
        "point-forecast" => PolicyVariant::PointForecast,
        "naive" => PolicyVariant::Naive,
        "latest-start" => PolicyVariant::LatestStart,
        other => bail!("unknown policy {other:?} (expected mdp, point-forecast, naive or latest-start)"),
    })
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let sc: Scenario =
            toml::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        if self.grid.steps == 0 {
            bail!("grid.steps must be positive");
        }
        if !(self.grid.step_minutes > 0.0) {
            bail!("grid.step_minutes must be positive");
        }
        parse_clock(&self.grid.start_time)?;
        match (&self.cost.k, &self.cost.table) {
            (Some(k), None) if *k > 0.0 => {}
            (None, Some(t)) if t.len() >= 2 => {}
            (Some(_), Some(_)) => bail!("cost: give either k or table, not both"),
            _ => bail!("cost: give a positive k or a table with at least two points"),
        }
        if let ProfileSource::Synthetic { peak_kw } = &self.load {
            if !(*peak_kw > 0.0) {
                bail!("load.peak_kw must be positive");
            }
        }
        if let ProfileSource::Synthetic { peak_kw } = &self.wind {
            if !(*peak_kw >= 0.0) {
                bail!("wind.peak_kw must be non-negative");
            }
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.count == 0 {
                bail!("clusters[{i}].count must be positive");
            }
            if c.duration_steps == 0 || c.duration_steps > self.grid.steps {
                bail!("clusters[{i}].duration_steps must be in 1..={}", self.grid.steps);
            }
            if !(c.power_kw > 0.0) {
                bail!("clusters[{i}].power_kw must be positive");
            }
            if !(c.deadline_sd_minutes >= 0.0) {
                bail!("clusters[{i}].deadline_sd_minutes must be non-negative");
            }
            parse_clock(&c.deadline_time)?;
        }
        if !(self.forecast.nu_24h >= 0.0) {
            bail!("forecast.nu_24h must be non-negative");
        }
        parse_policy(&self.run.policy)?;
        if self.run.replications == 0 {
            bail!("run.replications must be positive");
        }
        Ok(())
    }

    /// Built-in desk-scale scenario: two 60-device clusters on a 24 h /
    /// 5-minute grid starting at 21:00, affine cost, synthetic profiles.
    pub fn desk_default() -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            grid: GridConfig { start_time: "21:00".into(), steps: 288, step_minutes: 5.0 },
            cost: CostConfig { k: Some(50.0), table: None },
            load: ProfileSource::Synthetic { peak_kw: 35.0 },
            wind: ProfileSource::Synthetic { peak_kw: 50.0 },
            clusters: vec![
                ClusterConfig {
                    count: 60,
                    duration_steps: 12,
                    power_kw: 2.0,
                    deadline_time: "08:30".into(),
                    deadline_sd_minutes: 5.0,
                },
                ClusterConfig {
                    count: 60,
                    duration_steps: 12,
                    power_kw: 2.0,
                    deadline_time: "19:00".into(),
                    deadline_sd_minutes: 5.0,
                },
            ],
            forecast: ForecastConfig { nu_24h: 1e-5 },
            run: RunConfig { policy: "mdp".into(), base_seed: 42, replications: 20 },
        }
    }
}
