//! Run configuration: one optional TOML section per subcommand, each
//! overlaid on the built-in preset. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use paa_core::empirical::{DayEncoding, EmpiricalConfig, GapFill, SyntheticSeries};
use paa_core::experiments::{DistanceConfig, RunConfig};
use paa_core::paa::BoundStyle;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub simulate_iid: Option<Table>,
    pub distance_study: Option<Table>,
    pub simulate_feature: Option<Table>,
    pub empirical: Option<Table>,
    pub paa_solve: Option<Table>,
    pub analytics: Option<Table>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Recursive overlay. Arrays are replaced; a table whose `kind` differs from
/// the preset's replaces it outright, since its fields belong to another variant.
fn overlay(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) if b.get("kind").is_none() || o.get("kind").is_none() || b.get("kind") == o.get("kind") => {
                overlay(b, o)
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

pub fn resolve<T: Serialize + DeserializeOwned>(preset: T, section: Option<Table>, name: &str) -> anyhow::Result<T> {
    let Some(section) = section else { return Ok(preset) };
    let mut base = match Value::try_from(preset).context("serializing preset")? {
        Value::Table(t) => t,
        _ => bail!("preset for [{name}] is not a table"),
    };
    overlay(&mut base, section);
    Value::Table(base).try_into().with_context(|| format!("invalid [{name}] section"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSection {
    /// `date,occupancy` CSV; ignored in synthetic mode.
    pub input: Option<PathBuf>,
    pub days: usize,
    pub nurse_ratio: f64,
    pub encoding: DayEncoding,
    pub gaps: GapFill,
    pub synthetic: SyntheticSeries,
    /// Candidate index lists (0-based) for the subset sweep.
    pub subsets: Vec<Vec<usize>>,
    pub run: EmpiricalConfig,
}

impl Default for EmpiricalSection {
    fn default() -> Self {
        Self {
            input: None,
            days: 183,
            nurse_ratio: 3.0,
            encoding: DayEncoding::Six,
            gaps: GapFill::Reject,
            synthetic: SyntheticSeries::default(),
            subsets: Vec::new(),
            run: EmpiricalConfig::staffing_default(DayEncoding::Six),
        }
    }
}

impl EmpiricalSection {
    /// Keeps the autoregressive candidate pointed at the lag column when
    /// only the encoding was changed.
    pub fn sync_encoding(&mut self) {
        if self.encoding != DayEncoding::Six && self.run.candidates == EmpiricalConfig::staffing_default(DayEncoding::Six).candidates {
            self.run.candidates = EmpiricalConfig::staffing_default(self.encoding).candidates;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaaSolveSection {
    pub overage: f64,
    pub underage: f64,
    /// Box for the weights; `narrow`/`wide` are scaled by the row count.
    pub bounds: BoundStyle,
}

impl Default for PaaSolveSection {
    fn default() -> Self {
        Self { overage: 1.0, underage: 3.0, bounds: BoundStyle::Narrow }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsSection {
    /// Common mean and variance of the two Gaussian policies.
    pub policy_mean: f64,
    pub policy_var: f64,
    pub demand_mean: f64,
    pub demand_var: f64,
    pub overage: f64,
    pub underage: f64,
    pub points: usize,
}

impl Default for AnalyticsSection {
    fn default() -> Self {
        Self { policy_mean: 60.0, policy_var: 25.0, demand_mean: 60.0, demand_var: 100.0, overage: 1.0, underage: 3.0, points: 41 }
    }
}

pub fn iid_preset() -> RunConfig {
    RunConfig::iid_default()
}

pub fn feature_preset() -> RunConfig {
    RunConfig::feature_default()
}

pub fn distance_preset(full: bool) -> DistanceConfig {
    if full {
        DistanceConfig::full_default()
    } else {
        DistanceConfig::desk_default()
    }
}
