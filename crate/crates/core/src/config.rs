//! System configuration: sources, idling scheme, wakeup scheme, setup time,
//! and power profile.

use alloc::vec::Vec;

use crate::dist::Distribution;
use crate::error::ConfigError;

/// One data source: Poisson arrivals at `rate`, service times `service`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceSpec {
    pub rate: f64,
    pub service: Distribution,
}

/// What the server does right after finishing a service when no packet waits.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "scheme", rename_all = "lowercase")
)]
pub enum IdlingScheme {
    /// Hysteresis time: after serving source i, idle up to a draw of
    /// `hysteresis[i]`; sleep if no arrival lands first.
    Ht { hysteresis: Vec<Distribution> },
    /// Bernoulli sleep: after serving source i, sleep with probability
    /// `theta[i]`, else idle until the next arrival.
    Bs { theta: Vec<f64> },
    /// Conditional sleep: after a service of realized length h from source i,
    /// sleep iff h < B with B ~ Exponential(b[i]). b = 0 sleeps always,
    /// b = +inf never sleeps.
    Cs { b: Vec<f64> },
}

impl IdlingScheme {
    pub fn len(&self) -> usize {
        match self {
            IdlingScheme::Ht { hysteresis } => hysteresis.len(),
            IdlingScheme::Bs { theta } => theta.len(),
            IdlingScheme::Cs { b } => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How a sleeping server wakes up.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "scheme", rename_all = "kebab-case")
)]
pub enum WakeupScheme {
    /// Sleep until the n-th arrival since sleep start; the buffer keeps only
    /// the newest of those n packets.
    NPolicy { n: u32 },
    /// Sleep exactly one vacation W, then set up; if the buffer is still
    /// empty after setup, idle until the next arrival.
    SingleSleep { w: Distribution },
    /// Sleep repeated vacations W until the buffer is nonempty at a wake
    /// check, then set up. Each check costs `power.detect` energy.
    MultipleSleep { w: Distribution },
}

/// Power draw per server state. `detect` is an energy charge per
/// multiple-sleep wake check, not a rate; it is ignored by the other wakeup
/// schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerProfile {
    pub busy: f64,
    pub idle: f64,
    pub sleep: f64,
    pub setup: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub detect: f64,
}

impl PowerProfile {
    pub fn new(busy: f64, idle: f64, sleep: f64, setup: f64) -> Self {
        PowerProfile { busy, idle, sleep, setup, detect: 0.0 }
    }
}

/// Expected orderings (`sleep` cheapest, `idle` <= `busy`) are modelling
/// assumptions, not well-definedness conditions, so violating them only
/// produces a warning. Sensitivity sweeps may cross them on purpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationWarning {
    SleepPowerNotLowest,
    IdleAboveBusy,
}

impl core::fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ValidationWarning::SleepPowerNotLowest => {
                write!(f, "power.sleep is not strictly below busy/idle/setup")
            }
            ValidationWarning::IdleAboveBusy => write!(f, "power.idle exceeds power.busy"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemConfig {
    pub sources: Vec<SourceSpec>,
    pub idling: IdlingScheme,
    pub wakeup: WakeupScheme,
    pub setup: Distribution,
    pub power: PowerProfile,
}

impl SystemConfig {
    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    /// Total arrival rate lambda = sum of per-source rates.
    pub fn total_rate(&self) -> f64 {
        self.sources.iter().map(|s| s.rate).sum()
    }

    /// Checks every structural invariant; returns modelling warnings.
    pub fn validate(&self) -> Result<Vec<ValidationWarning>, ConfigError> {
        if self.sources.is_empty() {
            return Err(ConfigError::NoSources);
        }
        for (i, src) in self.sources.iter().enumerate() {
            if !(src.rate.is_finite() && src.rate > 0.0) {
                return Err(ConfigError::BadRate { source: i, rate: src.rate });
            }
            src.service.validate()?;
        }
        self.setup.validate()?;
        let k = self.sources.len();
        if self.idling.len() != k {
            return Err(ConfigError::SchemeLength { expected: k, got: self.idling.len() });
        }
        match &self.idling {
            IdlingScheme::Ht { hysteresis } => {
                for d in hysteresis {
                    d.validate()?;
                }
            }
            IdlingScheme::Bs { theta } => {
                for (i, &t) in theta.iter().enumerate() {
                    if !(0.0..=1.0).contains(&t) || t.is_nan() {
                        return Err(ConfigError::ThetaRange { source: i, theta: t });
                    }
                }
            }
            IdlingScheme::Cs { b } => {
                // +inf is allowed: it is the never-sleep limit
                for (i, &v) in b.iter().enumerate() {
                    if v.is_nan() || v < 0.0 {
                        return Err(ConfigError::BadThreshold { source: i, b: v });
                    }
                }
            }
        }
        match &self.wakeup {
            WakeupScheme::NPolicy { n } => {
                if *n < 1 {
                    return Err(ConfigError::BadN);
                }
            }
            WakeupScheme::SingleSleep { w } => w.validate()?,
            WakeupScheme::MultipleSleep { w } => {
                w.validate()?;
                let lambda = self.total_rate();
                if lambda > 0.0 && w.lst_raw(lambda) >= 1.0 {
                    return Err(ConfigError::DegenerateWakeup);
                }
            }
        }
        for (v, name) in [
            (self.power.busy, "busy"),
            (self.power.idle, "idle"),
            (self.power.sleep, "sleep"),
            (self.power.setup, "setup"),
            (self.power.detect, "detect"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::BadPower(name));
            }
        }
        let mut warnings = Vec::new();
        let p = &self.power;
        if !(p.sleep < p.busy && p.sleep < p.idle && p.sleep < p.setup) {
            warnings.push(ValidationWarning::SleepPowerNotLowest);
        }
        if p.idle > p.busy {
            warnings.push(ValidationWarning::IdleAboveBusy);
        }
        Ok(warnings)
    }
}
