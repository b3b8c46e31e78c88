//! On-disk parameter documents for the optimizer, game, and LCFS commands.
//! The system configuration itself deserializes straight into the core types.

use agewake_core::config::{PowerProfile, SourceSpec, SystemConfig};
use agewake_core::dist::Distribution;
use agewake_core::game::{GameSpec, SamplingCost};
use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

pub fn load_system_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let cfg: SystemConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    let warnings = cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

/// Parameters for `optimize`; p3 uses the first (only) source.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    pub sources: Vec<SourceSpec>,
    pub setup: Distribution,
    pub power: PowerProfile,
    pub tau: Vec<f64>,
    #[serde(default = "default_n_cap")]
    pub n_cap: u32,
}

fn default_n_cap() -> u32 {
    200
}

impl OptimizeParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let p: OptimizeParams = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if p.sources.is_empty() {
            bail!("optimize config needs at least one source");
        }
        if p.tau.len() != p.sources.len() {
            bail!(
                "tau has {} entries but there are {} sources",
                p.tau.len(),
                p.sources.len()
            );
        }
        for s in &p.sources {
            s.service.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        p.setup.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(p)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameParams {
    pub services: Vec<Distribution>,
    pub setup: Distribution,
    pub tau: Vec<f64>,
    pub lambda_max: f64,
    pub power: PowerProfile,
    #[serde(default)]
    pub costs: Vec<SamplingCost>,
}

impl GameParams {
    pub fn load(path: &Path) -> Result<GameSpec> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let p: GameParams = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        let spec = GameSpec {
            services: p.services,
            setup: p.setup,
            tau: p.tau,
            lambda_max: p.lambda_max,
            power: p.power,
            costs: p.costs,
        };
        spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(spec)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcfsParams {
    pub lambda: f64,
    pub service: Distribution,
    pub setup: Distribution,
    pub power: PowerProfile,
    pub tau: f64,
    #[serde(default = "default_lcfs_n_cap")]
    pub n_cap: u32,
}

fn default_lcfs_n_cap() -> u32 {
    100
}

impl LcfsParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let p: LcfsParams = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        p.service.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        p.setup.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        if !(p.tau.is_finite() && p.tau > 0.0) {
            bail!("tau must be positive");
        }
        Ok(p)
    }
}
