//! Simulation configuration: a single versioned JSON document holding
//! explicit scenarios and/or parameter grids. Unknown keys are errors so a
//! config file is a complete, auditable record of what ran.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use randms_core::harness::{scenario_grid, ScenarioConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub const PAPER_REPLICATION: &str = include_str!("../presets/paper_replication.json");
pub const APPENDIX_SIGMA: &str = include_str!("../presets/appendix_sigma.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub field: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub base: ScenarioConfig,
    pub sweeps: Vec<SweepSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub grids: Vec<GridSpec>,
}

impl SimulationConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: SimulationConfig =
            serde_json::from_str(text).context("malformed simulation config")?;
        if config.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            );
        }
        Ok(config)
    }

    /// Expands grids and concatenates with the explicit scenarios, in config
    /// order, checking id uniqueness.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>> {
        let mut out = self.scenarios.clone();
        for grid in &self.grids {
            let sweeps: Vec<(String, Vec<f64>)> = grid
                .sweeps
                .iter()
                .map(|s| (s.field.clone(), s.values.clone()))
                .collect();
            out.extend(scenario_grid(&grid.base, &sweeps)?);
        }
        let mut seen = std::collections::HashSet::new();
        for s in &out {
            s.validate()?;
            if !seen.insert(s.id.clone()) {
                bail!("duplicate scenario id '{}'", s.id);
            }
        }
        Ok(out)
    }
}

/// Resolves `--config` as a bundled preset name first, then as a file path.
pub fn load_config(arg: &str) -> Result<SimulationConfig> {
    let text = match arg {
        "paper_replication" => PAPER_REPLICATION.to_string(),
        "appendix_sigma" => APPENDIX_SIGMA.to_string(),
        path => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file '{path}'"))?,
    };
    SimulationConfig::parse(&text)
}
