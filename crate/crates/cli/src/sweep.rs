//! `--sweep FIELD=START:STOP:STEP` axes and their application to configs.
//!
//! Supported fields on a system config: `theta` / `theta[i]` (Bernoulli
//! sleep), `b` / `b[i]` (conditional-sleep threshold rate), `n` (N-policy),
//! `lambda` (scales every source rate proportionally), `sources[i].rate`,
//! `setup_mean` (rescales the setup distribution to the given mean), and
//! `power.{busy,idle,sleep,setup,detect}`. Optimizer params additionally
//! accept `tau` (every target at once).

use agewake_core::config::{IdlingScheme, SystemConfig, WakeupScheme};
use agewake_core::dist::Distribution;
use anyhow::{bail, Context, Result};

#[derive(Clone, Debug)]
pub struct Sweep {
    pub field: String,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parse `FIELD=START:STOP:STEP` (inclusive stop, within half a step).
    pub fn parse(text: &str) -> Result<Self> {
        let (field, range) = text
            .split_once('=')
            .with_context(|| format!("sweep '{text}' is missing '='"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            bail!("sweep '{text}' must look like FIELD=START:STOP:STEP");
        }
        let start: f64 = parts[0].parse().context("sweep start")?;
        let stop: f64 = parts[1].parse().context("sweep stop")?;
        let step: f64 = parts[2].parse().context("sweep step")?;
        if !(step.is_finite() && step > 0.0) || stop < start {
            bail!("sweep '{text}' needs step > 0 and stop >= start");
        }
        let mut values = Vec::new();
        let n = ((stop - start) / step + 0.5).floor() as usize;
        for i in 0..=n {
            let v = start + step * i as f64;
            if v <= stop + step * 1e-9 {
                values.push(v.min(stop));
            }
        }
        if values.is_empty() {
            bail!("sweep '{text}' produced no values");
        }
        Ok(Sweep { field: field.to_string(), values })
    }
}

/// Rescale a distribution to a target mean, preserving its family and shape.
pub fn with_mean(d: &Distribution, mean: f64) -> Result<Distribution> {
    if !(mean.is_finite() && mean >= 0.0) {
        bail!("target mean must be finite and >= 0");
    }
    if mean == 0.0 {
        return Ok(Distribution::Zero);
    }
    Ok(match *d {
        Distribution::Zero => Distribution::Deterministic { value: mean },
        Distribution::Deterministic { .. } => Distribution::Deterministic { value: mean },
        Distribution::Exponential { .. } => Distribution::Exponential { rate: 1.0 / mean },
        Distribution::Gamma { shape, .. } => Distribution::Gamma { shape, scale: mean / shape },
        Distribution::Uniform { low, high } => {
            let f = mean / ((low + high) / 2.0);
            Distribution::Uniform { low: low * f, high: high * f }
        }
    })
}

fn indexed(field: &str, name: &str) -> Option<Option<usize>> {
    if field == name {
        return Some(None);
    }
    let rest = field.strip_prefix(name)?;
    let idx = rest.strip_prefix('[')?.strip_suffix(']')?;
    idx.parse().ok().map(Some)
}

pub fn apply_system_field(cfg: &mut SystemConfig, field: &str, value: f64) -> Result<()> {
    if let Some(idx) = indexed(field, "theta") {
        match (&mut cfg.idling, idx) {
            (IdlingScheme::Bs { theta }, None) => theta.iter_mut().for_each(|t| *t = value),
            (IdlingScheme::Bs { theta }, Some(i)) => {
                *theta.get_mut(i).with_context(|| format!("theta[{i}] out of range"))? = value
            }
            _ => bail!("'theta' sweeps need the Bernoulli-sleep idling scheme"),
        }
        return Ok(());
    }
    if let Some(idx) = indexed(field, "b") {
        match (&mut cfg.idling, idx) {
            (IdlingScheme::Cs { b }, None) => b.iter_mut().for_each(|x| *x = value),
            (IdlingScheme::Cs { b }, Some(i)) => {
                *b.get_mut(i).with_context(|| format!("b[{i}] out of range"))? = value
            }
            _ => bail!("'b' sweeps need the conditional-sleep idling scheme"),
        }
        return Ok(());
    }
    match field {
        "n" => match &mut cfg.wakeup {
            WakeupScheme::NPolicy { n } => {
                if value < 1.0 || value.fract() != 0.0 {
                    bail!("'n' sweep values must be integers >= 1");
                }
                *n = value as u32;
            }
            _ => bail!("'n' sweeps need the N-policy wakeup scheme"),
        },
        "lambda" => {
            let total = cfg.total_rate();
            if !(total.is_finite() && total > 0.0) {
                bail!("cannot scale a zero total rate");
            }
            let f = value / total;
            cfg.sources.iter_mut().for_each(|s| s.rate *= f);
        }
        "setup_mean" => cfg.setup = with_mean(&cfg.setup, value)?,
        "power.busy" => cfg.power.busy = value,
        "power.idle" => cfg.power.idle = value,
        "power.sleep" => cfg.power.sleep = value,
        "power.setup" => cfg.power.setup = value,
        "power.detect" => cfg.power.detect = value,
        other => {
            if let Some(Some(i)) = indexed(other, "sources") {
                let _ = i;
                bail!("per-source sweeps use the form sources[i].rate");
            }
            if let Some(rest) = other.strip_prefix("sources[") {
                if let Some((idx, tail)) = rest.split_once(']') {
                    if tail == ".rate" {
                        let i: usize = idx.parse().context("source index")?;
                        cfg.sources
                            .get_mut(i)
                            .with_context(|| format!("sources[{i}] out of range"))?
                            .rate = value;
                        return Ok(());
                    }
                }
            }
            bail!("unknown sweep field '{other}'");
        }
    }
    Ok(())
}
