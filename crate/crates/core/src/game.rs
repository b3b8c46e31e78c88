//! Stackelberg interaction between the server and strategic sources.
//!
//! Stage I: the server picks the sleep length N (conditional sleep with
//! theta = 1 throughout; other sleep-probability vectors admit no tractable
//! equilibrium characterization and are rejected by construction — the API
//! simply has no theta parameter). Stage II: each source picks its sampling
//! rate, and since PAoI falls in a source's own rate and rises in the
//! others', every PAoI constraint binds at equilibrium. That turns Stage II
//! into the root-finding problem g(lambda) = 0 with
//!
//! ```text
//! g_i = (1 - U*(T))/T * lambda_i + lambda_i (E[H_i] - tau_i)
//!       + sum_l lambda_l (E[H_l] + E[U]) + N,            T = sum_l lambda_l.
//! ```
//!
//! For a trial total T the system is linear with a diagonal-plus-rank-one
//! matrix, so it solves in closed form; a scalar bisection on T finishes the
//! job. The solved total is strictly decreasing in the trial total, which is
//! what makes the equilibrium unique and the bisection globally convergent.

use alloc::vec::Vec;

use crate::analytic::{self, one_minus_lst_over_s};
use crate::config::{IdlingScheme, PowerProfile, SourceSpec, SystemConfig, WakeupScheme};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::math;

/// Sampling-cost descriptor c(lambda) = a * lambda^p, reported alongside the
/// equilibrium (it never moves the equilibrium itself: constraints bind
/// regardless of the cost level).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingCost {
    pub a: f64,
    pub p: f64,
}

impl Default for SamplingCost {
    fn default() -> Self {
        SamplingCost { a: 1.0, p: 1.0 }
    }
}

impl SamplingCost {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.a * math::powf(lambda, self.p)
    }
}

#[derive(Clone, Debug)]
pub struct GameSpec {
    pub services: Vec<Distribution>,
    pub setup: Distribution,
    pub tau: Vec<f64>,
    pub lambda_max: f64,
    pub power: PowerProfile,
    pub costs: Vec<SamplingCost>,
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.services.is_empty() {
            return Err(Error::Domain("at least one service distribution required"));
        }
        if self.tau.len() != self.services.len() {
            return Err(Error::Domain("tau length must match the number of sources"));
        }
        if !self.costs.is_empty() && self.costs.len() != self.services.len() {
            return Err(Error::Domain("costs length must match the number of sources"));
        }
        for d in &self.services {
            d.validate()?;
        }
        self.setup.validate()?;
        for (d, &t) in self.services.iter().zip(&self.tau) {
            if !(t.is_finite() && t > d.mean()) {
                return Err(Error::InfeasibleParameters(
                    "each tau_i must exceed E[H_i] for a finite equilibrium",
                ));
            }
        }
        if !(self.lambda_max.is_finite() && self.lambda_max > 0.0) {
            return Err(Error::Domain("lambda_max must be finite and positive"));
        }
        for c in &self.costs {
            if !(c.a >= 0.0 && c.p >= 1.0) {
                return Err(Error::Domain("sampling costs need a >= 0 and p >= 1"));
            }
        }
        Ok(())
    }

    pub fn cost(&self, i: usize, lambda: f64) -> f64 {
        self.costs.get(i).copied().unwrap_or_default().eval(lambda)
    }
}

#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub rates: Vec<f64>,
    pub n: u32,
    pub energy: f64,
    /// All rates within lambda_max.
    pub feasible: bool,
    /// g_i evaluated at the returned rates.
    pub residuals: Vec<f64>,
}

/// Solve for the rank-one linear system at a fixed total rate; `None` when
/// some diagonal entry is nonnegative (rates would diverge or go negative),
/// which the bisection treats as the "total too small" side.
fn rates_at_total(spec: &GameSpec, n: f64, total: f64) -> Option<(Vec<f64>, f64)> {
    let r = one_minus_lst_over_s(&spec.setup, total);
    let eu = spec.setup.mean();
    let k = spec.services.len();
    let mut diag = Vec::with_capacity(k);
    for (h, &t) in spec.services.iter().zip(&spec.tau) {
        let a = r + h.mean() - t;
        if a >= 0.0 {
            return None;
        }
        diag.push(a);
    }
    let mut s = 0.0;
    for (h, &a) in spec.services.iter().zip(&diag) {
        s += (h.mean() + eu) / a;
    }
    if 1.0 + s <= 0.0 {
        return None;
    }
    let rates: Vec<f64> = diag.iter().map(|&a| -n / ((1.0 + s) * a)).collect();
    let sum = rates.iter().sum();
    Some((rates, sum))
}

fn g_residuals(spec: &GameSpec, n: f64, rates: &[f64]) -> Vec<f64> {
    let total: f64 = rates.iter().sum();
    let r = one_minus_lst_over_s(&spec.setup, total);
    let eu = spec.setup.mean();
    let coupling: f64 = spec
        .services
        .iter()
        .zip(rates)
        .map(|(h, &l)| l * (h.mean() + eu))
        .sum();
    spec.services
        .iter()
        .zip(&spec.tau)
        .zip(rates)
        .map(|((h, &t), &l)| r * l + l * (h.mean() - t) + coupling + n)
        .collect()
}

/// Equilibrium sampling rates for a fixed N (theta = 1), by bisection on the
/// total rate over the given bracket.
pub fn stage2_equilibrium_with_bracket(
    spec: &GameSpec,
    n: u32,
    mut lo: f64,
    mut hi: f64,
) -> Result<Equilibrium> {
    spec.validate()?;
    if n < 1 {
        return Err(Error::Domain("n must be >= 1"));
    }
    let nf = n as f64;
    // sign(F) where F(T) = solved_total(T) - T; None counts as positive
    let excess = |t: f64| -> f64 {
        match rates_at_total(spec, nf, t) {
            Some((_, sum)) => sum - t,
            None => f64::INFINITY,
        }
    };
    if excess(lo) < 0.0 {
        return Err(Error::NoEquilibrium);
    }
    if excess(hi) > 0.0 {
        // the fixed point lies beyond the admissible total
        return Err(Error::NoEquilibrium);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let (rates, _) = rates_at_total(spec, nf, t_star).ok_or(Error::NoEquilibrium)?;
    if rates.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::InfeasibleParameters("equilibrium rate is not positive"));
    }
    let residuals = g_residuals(spec, nf, &rates);
    let feasible = rates.iter().all(|&l| l <= spec.lambda_max + 1e-12);
    let energy = equilibrium_energy(spec, n, &rates)?;
    Ok(Equilibrium { rates, n, energy, feasible, residuals })
}

/// Equilibrium sampling rates for a fixed N over the default bracket
/// (0, k * lambda_max].
pub fn stage2_equilibrium(spec: &GameSpec, n: u32) -> Result<Equilibrium> {
    spec.validate()?;
    let hi = spec.lambda_max * spec.services.len() as f64;
    stage2_equilibrium_with_bracket(spec, n, 1e-12, hi)
}

/// Energy consumption rate at the equilibrium point: theta = 1 conditional
/// sleep (threshold rate 0) under the N-policy, evaluated through the
/// standard closed form.
pub fn equilibrium_energy(spec: &GameSpec, n: u32, rates: &[f64]) -> Result<f64> {
    let cfg = equilibrium_config(spec, n, rates);
    analytic::energy_rate(&cfg)
}

/// System configuration realizing the equilibrium operating point.
pub fn equilibrium_config(spec: &GameSpec, n: u32, rates: &[f64]) -> SystemConfig {
    SystemConfig {
        sources: spec
            .services
            .iter()
            .zip(rates)
            .map(|(service, &rate)| SourceSpec { rate, service: *service })
            .collect(),
        idling: IdlingScheme::Cs { b: alloc::vec![0.0; rates.len()] },
        wakeup: WakeupScheme::NPolicy { n },
        setup: spec.setup,
        power: spec.power,
    }
}

/// Largest sleep length the server may enumerate: floor of
/// lambda_max * (min_i(tau_i - E[H_i]) - E[H_j] - E[U]) with j the argmin,
/// clamped to at least 1.
pub fn n_max(spec: &GameSpec) -> Result<u32> {
    spec.validate()?;
    let (j, min_val) = spec
        .services
        .iter()
        .zip(&spec.tau)
        .enumerate()
        .map(|(i, (h, &t))| (i, t - h.mean()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let expr = spec.lambda_max * (min_val - spec.services[j].mean() - spec.setup.mean());
    if expr <= 0.0 {
        return Err(Error::NoFeasibleN);
    }
    Ok((math::floor(expr) as u32).max(1))
}

#[derive(Clone, Debug)]
pub struct GameRow {
    pub n: u32,
    /// Empty when no equilibrium exists for this N.
    pub rates: Vec<f64>,
    pub energy: f64,
    pub feasible: bool,
    pub costs: Vec<f64>,
    /// Largest |g_i| at the solution.
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct GameSolution {
    pub best: Equilibrium,
    pub table: Vec<GameRow>,
}

/// Stage-I enumeration: compute the Stage-II equilibrium for every
/// N = 1..n_max, skip the ones whose rates exceed lambda_max, and keep the
/// energy minimizer. The full table backs the rate/energy-vs-N plots.
pub fn algorithm1(spec: &GameSpec) -> Result<GameSolution> {
    spec.validate()?;
    let cap = n_max(spec)?;
    let mut table = Vec::with_capacity(cap as usize);
    let mut best: Option<Equilibrium> = None;
    for n in 1..=cap {
        match stage2_equilibrium(spec, n) {
            Ok(eq) => {
                let costs = eq
                    .rates
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| spec.cost(i, l))
                    .collect();
                let max_residual = eq
                    .residuals
                    .iter()
                    .fold(0.0f64, |m, &r| m.max(math::abs(r)));
                table.push(GameRow {
                    n,
                    rates: eq.rates.clone(),
                    energy: eq.energy,
                    feasible: eq.feasible,
                    costs,
                    max_residual,
                });
                if eq.feasible && best.as_ref().is_none_or(|b| eq.energy < b.energy) {
                    best = Some(eq);
                }
            }
            Err(Error::NoEquilibrium) | Err(Error::InfeasibleParameters(_)) => {
                table.push(GameRow {
                    n,
                    rates: Vec::new(),
                    energy: f64::NAN,
                    feasible: false,
                    costs: Vec::new(),
                    max_residual: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let best = best.ok_or(Error::NoFeasibleN)?;
    Ok(GameSolution { best, table })
}
