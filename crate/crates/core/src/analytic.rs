//! Closed-form sleep probability, energy consumption rate, PAoI, and AoI.
//!
//! Everything rests on the class-i regenerative cycle V_i: the span from the
//! start of a source-i service to the next service start of any class. Its
//! LST factors into a service part, an idle branch, and a sleep branch whose
//! wake factor depends on the wakeup scheme. First and second cycle moments
//! come from exact jet differentiation of those LSTs at s = 0, and the
//! source-i inter-service span I_ii is the geometric mixture
//!
//! ```text
//! I_ii*(s) = (lambda_i/lambda) V_i*(s) / (1 - sum_{l != i} (lambda_l/lambda) V_l*(s))
//! ```
//!
//! PAoI_i = E[G] + E[I_ii] + E[H_i] and AoI_i = E[I_ii^2]/(2 E[I_ii]) + E[G] +
//! E[H_i], where G is the waiting time of the served ("informative") packet.

use alloc::vec::Vec;

use crate::config::{IdlingScheme, PowerProfile, SystemConfig, WakeupScheme};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::math;
use crate::report::{Method, MetricsReport, SourceMetrics};

/// Deterministic hysteresis long enough that exp(-lambda * D) underflows to
/// exactly 0 for any realistic rate: the never-sleep limit of HT.
pub const NEVER_SLEEP_HYSTERESIS: f64 = 1e150;

/// (1 - X*(s)) / s, switching to the Taylor series for small s where the
/// direct form cancels catastrophically. Equals E[X] at s = 0.
pub(crate) fn one_minus_lst_over_s(d: &Distribution, s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s < 1e-5 {
        // 1 - X*(s) = E[X] s - E[X^2] s^2/2 + E[X^3] s^3/6 - ...
        let m1 = d.moment(1).unwrap_or(0.0);
        let m2 = d.moment(2).unwrap_or(0.0);
        let m3 = d.moment(3).unwrap_or(0.0);
        m1 - s * m2 / 2.0 + s * s * m3 / 6.0
    } else {
        (1.0 - d.lst_raw(s)) / s
    }
}

/// Probability that the server sleeps after completing a source-i service:
/// HT -> D_i*(lambda), BS -> theta_i, CS -> H_i*(b_i).
pub fn sleep_probability(cfg: &SystemConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    Ok(theta_raw(cfg, i))
}

fn theta_raw(cfg: &SystemConfig, i: usize) -> f64 {
    let lambda = cfg.total_rate();
    match &cfg.idling {
        IdlingScheme::Ht { hysteresis } => hysteresis[i].lst_raw(lambda),
        IdlingScheme::Bs { theta } => theta[i],
        IdlingScheme::Cs { b } => cfg.sources[i].service.lst_raw(b[i]),
    }
}

/// LST jet of the wake factor (sleep span + setup + any post-setup idle) at
/// base point s0.
fn wake_jet(cfg: &SystemConfig, s0: f64) -> Jet2 {
    let lambda = cfg.total_rate();
    let s = Jet2::var(s0);
    let lam = Jet2::constant(lambda);
    let u = cfg.setup.lst_jet(s0);
    match &cfg.wakeup {
        WakeupScheme::NPolicy { n } => (lam / (lam + s)).powi(*n) * u,
        WakeupScheme::SingleSleep { w } => {
            let w0 = w.lst_jet(s0);
            let w_shift = w.lst_jet(s0 + lambda);
            let u_shift = cfg.setup.lst_jet(s0 + lambda);
            w0 * u - (s / (s + lam)) * w_shift * u_shift
        }
        WakeupScheme::MultipleSleep { w } => {
            let w0 = w.lst_jet(s0);
            let w_shift = w.lst_jet(s0 + lambda);
            ((w0 - w_shift) / (Jet2::constant(1.0) - w_shift)) * u
        }
    }
}

/// LST jet of the class-i regenerative cycle at base point s0.
fn cycle_jet(cfg: &SystemConfig, i: usize, s0: f64) -> Jet2 {
    let lambda = cfg.total_rate();
    let s = Jet2::var(s0);
    let lam = Jet2::constant(lambda);
    let idle = lam / (lam + s);
    let wake = wake_jet(cfg, s0);
    let h = cfg.sources[i].service.lst_jet(s0);
    match &cfg.idling {
        IdlingScheme::Ht { hysteresis } => {
            let d_shift = hysteresis[i].lst_jet(s0 + lambda);
            h * (idle * (Jet2::constant(1.0) - d_shift) + d_shift * wake)
        }
        IdlingScheme::Bs { theta } => {
            let t = Jet2::constant(theta[i]);
            h * (idle * (Jet2::constant(1.0) - t) + t * wake)
        }
        IdlingScheme::Cs { b } => {
            let h_shift = cfg.sources[i].service.lst_jet(s0 + b[i]);
            (h - h_shift) * idle + h_shift * wake
        }
    }
}

/// V_i*(s), the class-i regenerative-cycle LST.
pub fn cycle_lst(cfg: &SystemConfig, i: usize, s: f64) -> Result<f64> {
    cfg.validate()?;
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain("cycle_lst requires s >= 0"));
    }
    Ok(cycle_jet(cfg, i, s).v)
}

/// (E[V_i], E[V_i^2]) from exact first/second derivatives at 0.
pub fn cycle_moments(cfg: &SystemConfig, i: usize) -> Result<(f64, f64)> {
    cfg.validate()?;
    let j = cycle_jet(cfg, i, 0.0);
    Ok((-j.d1, j.d2))
}

/// (E[I_ii], E[I_ii^2]) by jet differentiation of the I_ii* quotient at 0.
pub fn interval_moments(cfg: &SystemConfig, i: usize) -> Result<(f64, f64)> {
    cfg.validate()?;
    Ok(interval_moments_raw(cfg, i))
}

fn interval_moments_raw(cfg: &SystemConfig, i: usize) -> (f64, f64) {
    let lambda = cfg.total_rate();
    let p_i = cfg.sources[i].rate / lambda;
    let num = cycle_jet(cfg, i, 0.0) * p_i;
    let mut den = Jet2::constant(1.0);
    for (l, src) in cfg.sources.iter().enumerate() {
        if l != i {
            den = den - cycle_jet(cfg, l, 0.0) * (src.rate / lambda);
        }
    }
    let ii = num / den;
    (-ii.d1, ii.d2)
}

/// Expected waiting time E[G_i] of an informative packet. One packet per
/// cycle is served; it waits only when it lands during a sleep or setup
/// phase, so the value is identical for every source.
pub fn expected_wait(cfg: &SystemConfig, _i: usize) -> Result<f64> {
    cfg.validate()?;
    Ok(expected_wait_raw(cfg))
}

fn expected_wait_raw(cfg: &SystemConfig) -> f64 {
    let lambda = cfg.total_rate();
    let sleep_weight: f64 = cfg
        .sources
        .iter()
        .enumerate()
        .map(|(l, src)| theta_raw(cfg, l) * src.rate / lambda)
        .sum();
    let u = &cfg.setup;
    let wait_given_sleep = match &cfg.wakeup {
        // time-reversal of the Poisson process over the setup window
        WakeupScheme::NPolicy { .. } => one_minus_lst_over_s(u, lambda),
        WakeupScheme::SingleSleep { w } => {
            let wu = w.lst_raw(lambda) * u.lst_raw(lambda);
            (1.0 - wu) / lambda
                + w.lst_deriv_raw(lambda, 1) * u.lst_raw(lambda)
                + w.lst_raw(lambda) * u.lst_deriv_raw(lambda, 1)
        }
        WakeupScheme::MultipleSleep { w } => {
            1.0 / lambda + u.lst_raw(lambda) * w.lst_deriv_raw(lambda, 1) / (1.0 - w.lst_raw(lambda))
        }
    };
    sleep_weight * wait_given_sleep
}

/// Mean sleep-branch span (sleep + setup + any trailing idle) and the energy
/// spent in it, per sleeping cycle.
fn sleep_branch(cfg: &SystemConfig) -> (f64, f64) {
    let lambda = cfg.total_rate();
    let p = &cfg.power;
    let eu = cfg.setup.mean();
    match &cfg.wakeup {
        WakeupScheme::NPolicy { n } => {
            let span = *n as f64 / lambda + eu;
            (span, *n as f64 / lambda * p.sleep + eu * p.setup)
        }
        WakeupScheme::SingleSleep { w } => {
            let tail = w.lst_raw(lambda) * cfg.setup.lst_raw(lambda) / lambda;
            let span = w.mean() + eu + tail;
            (span, w.mean() * p.sleep + eu * p.setup + tail * p.idle)
        }
        WakeupScheme::MultipleSleep { w } => {
            let denom = 1.0 - w.lst_raw(lambda);
            let span = w.mean() / denom + eu;
            (span, (w.mean() * p.sleep + p.detect) / denom + eu * p.setup)
        }
    }
}

/// Expected energy consumption rate: the renewal-reward ratio of per-cycle
/// energy to per-cycle length, mixed over classes with weights lambda_i/lambda.
pub fn energy_rate(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(energy_rate_raw(cfg))
}

fn energy_rate_raw(cfg: &SystemConfig) -> f64 {
    let lambda = cfg.total_rate();
    let p = &cfg.power;
    let (span, sleep_energy) = sleep_branch(cfg);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, src) in cfg.sources.iter().enumerate() {
        let pi = src.rate / lambda;
        let theta = theta_raw(cfg, i);
        let eh = src.service.mean();
        num += pi * (p.busy * eh + (1.0 - theta) / lambda * p.idle + theta * sleep_energy);
        den += pi * (eh + (1.0 - theta) / lambda + theta * span);
    }
    num / den
}

/// Expected peak age of information for receiver i.
pub fn paoi(cfg: &SystemConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    Ok(paoi_raw(cfg, i))
}

fn paoi_raw(cfg: &SystemConfig, i: usize) -> f64 {
    let (m1, _) = interval_moments_raw(cfg, i);
    expected_wait_raw(cfg) + m1 + cfg.sources[i].service.mean()
}

/// The N-policy PAoI written out termwise, kept as an independent expression
/// of the same quantity for regression against the cycle-moment machinery.
pub fn paoi_expanded(cfg: &SystemConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    let n = match &cfg.wakeup {
        WakeupScheme::NPolicy { n } => *n as f64,
        _ => return Err(Error::Domain("paoi_expanded applies to the N-policy only")),
    };
    let lambda = cfg.total_rate();
    let lambda_i = cfg.sources[i].rate;
    let eu = cfg.setup.mean();
    let mut acc = 0.0;
    for (l, src) in cfg.sources.iter().enumerate() {
        let theta = theta_raw(cfg, l);
        acc += src.rate / lambda_i * (src.service.mean() + theta * ((n - 1.0) / lambda + eu));
    }
    Ok(acc + expected_wait_raw(cfg) + 1.0 / lambda_i + cfg.sources[i].service.mean())
}

/// Expected age of information for receiver i.
///
/// The single-source N-policy case uses the per-scheme expanded second
/// moments; every other case differentiates the I_ii* quotient exactly.
pub fn aoi(cfg: &SystemConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    let (m1, m2) = if cfg.num_sources() == 1 && matches!(cfg.wakeup, WakeupScheme::NPolicy { .. })
    {
        single_source_interval_moments(cfg)
    } else {
        interval_moments_raw(cfg, i)
    };
    Ok(m2 / (2.0 * m1) + expected_wait_raw(cfg) + cfg.sources[i].service.mean())
}

/// Expanded (E[I_11], E[I_11^2]) for the single-source N-policy, one branch
/// per idling scheme. Assumes a validated single-source config.
pub fn single_source_interval_moments(cfg: &SystemConfig) -> (f64, f64) {
    let n = match &cfg.wakeup {
        WakeupScheme::NPolicy { n } => *n as f64,
        _ => unreachable!("expanded moments exist only for the N-policy"),
    };
    let lambda = cfg.total_rate();
    let service = &cfg.sources[0].service;
    let eh = service.mean();
    let h2 = service.moment(2).unwrap();
    let eu = cfg.setup.mean();
    let u1 = cfg.setup.lst_deriv_raw(0.0, 1); // -E[U]
    let u2 = cfg.setup.moment(2).unwrap();
    let theta = theta_raw(cfg, 0);
    let m1 = eh + (1.0 - theta) / lambda + theta * (n / lambda + eu);
    let l2 = lambda * lambda;
    let m2 = match &cfg.idling {
        IdlingScheme::Ht { hysteresis } => {
            let d1 = hysteresis[0].lst_deriv_raw(lambda, 1);
            2.0 * (1.0 - theta) / l2 + 2.0 * d1 / lambda - 2.0 * n * d1 / lambda
                + 2.0 * d1 * u1
                + theta * n * (n + 1.0) / l2
                - 2.0 * theta * n / lambda * u1
                + theta * u2
                + h2
                + 2.0 * eh * ((1.0 - theta) / lambda + theta * (n / lambda + eu))
        }
        IdlingScheme::Bs { .. } => {
            2.0 * eh * ((1.0 - theta + n * theta) / lambda - theta * u1)
                + 2.0 * (1.0 - theta) / l2
                + theta * n * (n + 1.0) / l2
                + h2
                - 2.0 * theta * n / lambda * u1
                + theta * u2
        }
        IdlingScheme::Cs { b } => {
            let h1b = service.lst_deriv_raw(b[0], 1);
            2.0 * (eh + h1b) / lambda + 2.0 * (1.0 - theta) / l2 - 2.0 * h1b * n / lambda
                + 2.0 * h1b * u1
                + n * (n + 1.0) * theta / l2
                - 2.0 * theta * n / lambda * u1
                + theta * u2
                + h2
        }
    };
    (m1, m2)
}

/// Full analytic report: per-source theta, PAoI, AoI, and the energy rate.
pub fn evaluate(cfg: &SystemConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let mut per_source = Vec::with_capacity(cfg.num_sources());
    for i in 0..cfg.num_sources() {
        per_source.push(SourceMetrics {
            aoi: aoi(cfg, i)?,
            paoi: paoi_raw(cfg, i),
            theta: theta_raw(cfg, i),
            aoi_ci: None,
            paoi_ci: None,
        });
    }
    Ok(MetricsReport {
        per_source,
        energy_rate: energy_rate_raw(cfg),
        energy_ci: None,
        method: Method::Analytic,
    })
}

/// Invert theta = H*(b) for the conditional-sleep threshold rate b.
///
/// H*(., b) falls strictly from 1 to P(H = 0), so bisection over a doubling
/// bracket converges; tolerance 1e-12 on theta. theta = 1 maps to b = 0 and
/// theta = 0 to b = +inf (the never-sleep limit).
pub fn theta_to_cs_rate(service: &Distribution, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) || theta.is_nan() {
        return Err(Error::Domain("theta must lie in [0, 1]"));
    }
    if theta == 1.0 {
        return Ok(0.0);
    }
    if theta == 0.0 {
        return Ok(f64::INFINITY);
    }
    if service.is_zero() {
        return Err(Error::Domain(
            "a zero service time sleeps with probability 1 for every threshold",
        ));
    }
    let mut hi = 1.0;
    while service.lst_raw(hi) >= theta {
        hi *= 2.0;
        if hi > 1e30 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = service.lst_raw(mid);
        if math::abs(v - theta) <= 1e-15 || hi - lo <= f64::EPSILON * mid {
            return Ok(mid);
        }
        if v > theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Deterministic hysteresis achieving sleep probability theta at total rate
/// lambda: D = -ln(theta)/lambda (Zero when theta = 1, effectively infinite
/// when theta = 0).
pub fn theta_to_ht_hysteresis(theta: f64, lambda: f64) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&theta) || theta.is_nan() {
        return Err(Error::Domain("theta must lie in [0, 1]"));
    }
    if lambda <= 0.0 {
        return Err(Error::Domain("lambda must be positive"));
    }
    Ok(if theta == 1.0 {
        Distribution::Zero
    } else if theta == 0.0 {
        Distribution::Deterministic { value: NEVER_SLEEP_HYSTERESIS }
    } else {
        Distribution::Deterministic { value: -math::ln(theta) / lambda }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdlingKind {
    Ht,
    Bs,
    Cs,
}

/// Rebuild `cfg` with the given idling scheme tuned to hit the sleep
/// probabilities `thetas` exactly; energy and PAoI are then scheme-invariant,
/// which is what the cross-scheme comparisons exploit.
pub fn with_matched_idling(
    cfg: &SystemConfig,
    kind: IdlingKind,
    thetas: &[f64],
) -> Result<SystemConfig> {
    if thetas.len() != cfg.num_sources() {
        return Err(Error::Domain("theta vector length must match source count"));
    }
    let lambda = cfg.total_rate();
    let idling = match kind {
        IdlingKind::Ht => IdlingScheme::Ht {
            hysteresis: thetas
                .iter()
                .map(|&t| theta_to_ht_hysteresis(t, lambda))
                .collect::<Result<Vec<_>>>()?,
        },
        IdlingKind::Bs => IdlingScheme::Bs { theta: thetas.to_vec() },
        IdlingKind::Cs => IdlingScheme::Cs {
            b: cfg
                .sources
                .iter()
                .zip(thetas)
                .map(|(src, &t)| theta_to_cs_rate(&src.service, t))
                .collect::<Result<Vec<_>>>()?,
        },
    };
    let mut out = cfg.clone();
    out.idling = idling;
    Ok(out)
}

/// PAoI of the single-source LCFS system (unbounded stack, newest served
/// first, every packet eventually processed) under the N-policy.
///
/// `theta` is the probability that the server sleeps when the system
/// empties. Unlike the single-buffer system, arrivals during a service are
/// queued rather than discarded, so the service that empties a busy period
/// is exponentially tilted short; a conditional-sleep threshold with rate b
/// therefore lands here as theta = H*(lambda + b) / H*(lambda), not H*(b).
/// Requires lambda * E[H] < 1.
pub fn lcfs_paoi(
    lambda: f64,
    service: &Distribution,
    setup: &Distribution,
    theta: f64,
    n: u32,
) -> Result<f64> {
    lcfs_check(lambda, service, setup, theta, n)?;
    let rho = lambda * service.mean();
    let q = 1.0 + theta * (n as f64 - 1.0 + lambda * setup.mean());
    let h_l = service.lst_raw(lambda);
    let h1_l = service.lst_deriv_raw(lambda, 1);
    let num = theta * (1.0 - rho) * (1.0 - setup.lst_raw(lambda)) / q + 2.0 - h_l + lambda * h1_l;
    let den = lambda * (1.0 - h_l + (1.0 - rho) / q);
    Ok(service.mean() + num / den)
}

/// Energy consumption rate of the same LCFS system.
pub fn lcfs_energy(
    lambda: f64,
    service: &Distribution,
    setup: &Distribution,
    theta: f64,
    n: u32,
    power: &PowerProfile,
) -> Result<f64> {
    lcfs_check(lambda, service, setup, theta, n)?;
    let rho = lambda * service.mean();
    let nn = n as f64;
    let vac_energy = (1.0 - theta) * power.idle / lambda
        + theta * (nn / lambda * power.sleep + setup.mean() * power.setup);
    let vac_mean = (1.0 - theta) / lambda + theta * (nn / lambda + setup.mean());
    Ok(rho * power.busy + (1.0 - rho) * vac_energy / vac_mean)
}

fn lcfs_check(
    lambda: f64,
    service: &Distribution,
    setup: &Distribution,
    theta: f64,
    n: u32,
) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("lambda must be finite and positive"));
    }
    service.validate()?;
    setup.validate()?;
    if !(0.0..=1.0).contains(&theta) || theta.is_nan() {
        return Err(Error::Domain("theta must lie in [0, 1]"));
    }
    if n < 1 {
        return Err(Error::Domain("n must be >= 1"));
    }
    let rho = lambda * service.mean();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SourceSpec;
    use alloc::vec;

    fn one_source(
        rate: f64,
        service: Distribution,
        idling: IdlingScheme,
        wakeup: WakeupScheme,
        setup: Distribution,
    ) -> SystemConfig {
        SystemConfig {
            sources: vec![SourceSpec { rate, service }],
            idling,
            wakeup,
            setup,
            power: PowerProfile::new(2.0, 1.0, 0.5, 1.5),
        }
    }

    #[test]
    fn sleep_probability_spec_examples() {
        // CS: H ~ Exp(1), b = 1 -> 0.5
        let cfg = one_source(
            0.7,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![1.0] },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Zero,
        );
        assert!((sleep_probability(&cfg, 0).unwrap() - 0.5).abs() < 1e-15);

        // HT: D deterministic ln(2.5)/2, lambda = 2 -> 0.4
        let cfg = one_source(
            2.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Ht {
                hysteresis: vec![Distribution::Deterministic { value: math::ln(2.5) / 2.0 }],
            },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Zero,
        );
        assert!((sleep_probability(&cfg, 0).unwrap() - 0.4).abs() < 1e-15);

        // CS with b = 0 always sleeps
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![0.0] },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Zero,
        );
        assert_eq!(sleep_probability(&cfg, 0).unwrap(), 1.0);
    }

    #[test]
    fn energy_rate_spec_collapses() {
        // theta = 0 collapse: (P_B + P_ID)/(E[H] + 1/lambda)
        let mut cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![f64::INFINITY] },
            WakeupScheme::NPolicy { n: 3 },
            Distribution::Exponential { rate: 2.0 },
        );
        cfg.power = PowerProfile::new(2.0, 1.0, 0.5, 1.5);
        assert!((energy_rate(&cfg).unwrap() - 1.5).abs() < 1e-12);

        // theta = 1, N = 1, U = 0: (P_B + P_SL)/(E[H] + 1/lambda)
        let mut cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![0.0] },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Zero,
        );
        cfg.power = PowerProfile::new(2.0, 1.0, 0.5, 1.5);
        assert!((energy_rate(&cfg).unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn paoi_spec_examples() {
        // never sleep: 2 E[H] + 1/lambda = 3
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![0.0] },
            WakeupScheme::NPolicy { n: 5 },
            Distribution::Exponential { rate: 0.5 },
        );
        assert!((paoi(&cfg, 0).unwrap() - 3.0).abs() < 1e-12);

        // theta = 1, N = 1, U = 0 behaves like idling
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![1.0] },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Zero,
        );
        assert!((paoi(&cfg, 0).unwrap() - 3.0).abs() < 1e-12);

        // theta = 1, N = 4, U = Det(1), lambda = 2
        let cfg = one_source(
            2.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![1.0] },
            WakeupScheme::NPolicy { n: 4 },
            Distribution::Deterministic { value: 1.0 },
        );
        let expect = 5.0 + (1.0 - math::exp(-2.0)) / 2.0;
        assert!((paoi(&cfg, 0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn expected_wait_examples() {
        // theta = 0 -> 0
        let cfg = one_source(
            1.3,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![0.0] },
            WakeupScheme::NPolicy { n: 2 },
            Distribution::Exponential { rate: 1.0 },
        );
        assert_eq!(expected_wait(&cfg, 0).unwrap(), 0.0);

        // U = Zero -> 0
        let cfg = one_source(
            1.3,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![0.7] },
            WakeupScheme::NPolicy { n: 2 },
            Distribution::Zero,
        );
        assert_eq!(expected_wait(&cfg, 0).unwrap(), 0.0);

        // theta = 1, U ~ Exp(1), lambda = 1 -> 0.5
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![1.0] },
            WakeupScheme::NPolicy { n: 2 },
            Distribution::Exponential { rate: 1.0 },
        );
        assert!((expected_wait(&cfg, 0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn aoi_never_sleep_mg11() {
        // I = H + Exp(lambda): E[I] = 2, E[I^2] = 6, AoI = 6/4 + 1 = 2.5
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![0.0] },
            WakeupScheme::NPolicy { n: 1 },
            Distribution::Exponential { rate: 1.0 },
        );
        assert!((aoi(&cfg, 0).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn cycle_moment_examples() {
        // any scheme at s = 0 evaluates to 1
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![1.0] },
            WakeupScheme::NPolicy { n: 2 },
            Distribution::Exponential { rate: 2.0 },
        );
        assert!((cycle_lst(&cfg, 0, 0.0).unwrap() - 1.0).abs() < 1e-15);

        // HT with D = Zero always sleeps: E[V] = E[H] + N/lambda + E[U]
        let cfg = one_source(
            0.8,
            Distribution::Exponential { rate: 2.0 },
            IdlingScheme::Ht { hysteresis: vec![Distribution::Zero] },
            WakeupScheme::NPolicy { n: 3 },
            Distribution::Deterministic { value: 0.7 },
        );
        let (m1, _) = cycle_moments(&cfg, 0).unwrap();
        assert!((m1 - (0.5 + 3.0 / 0.8 + 0.7)).abs() < 1e-12);

        // CS spec example: E[V] = 2.75
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Cs { b: vec![1.0] },
            WakeupScheme::NPolicy { n: 2 },
            Distribution::Exponential { rate: 2.0 },
        );
        let (m1, _) = cycle_moments(&cfg, 0).unwrap();
        assert!((m1 - 2.75).abs() < 1e-12);
    }

    #[test]
    fn expanded_moments_match_machinery() {
        let schemes: [IdlingScheme; 3] = [
            IdlingScheme::Ht {
                hysteresis: vec![Distribution::Gamma { shape: 2.0, scale: 0.3 }],
            },
            IdlingScheme::Bs { theta: vec![0.6] },
            IdlingScheme::Cs { b: vec![0.8] },
        ];
        for idling in schemes {
            let cfg = one_source(
                0.9,
                Distribution::Gamma { shape: 0.5, scale: 4.0 },
                idling,
                WakeupScheme::NPolicy { n: 3 },
                Distribution::Uniform { low: 0.2, high: 1.4 },
            );
            let (m1a, m2a) = interval_moments(&cfg, 0).unwrap();
            let (m1b, m2b) = single_source_interval_moments(&cfg);
            assert!((m1a - m1b).abs() < 1e-9 * m1b, "{:?}", cfg.idling);
            assert!((m2a - m2b).abs() < 1e-9 * m2b, "{:?}", cfg.idling);
        }
    }

    #[test]
    fn paoi_expanded_matches_machinery_multisource() {
        let cfg = SystemConfig {
            sources: vec![
                SourceSpec { rate: 0.8, service: Distribution::Exponential { rate: 1.0 } },
                SourceSpec { rate: 1.2, service: Distribution::Gamma { shape: 2.0, scale: 0.4 } },
            ],
            idling: IdlingScheme::Cs { b: vec![1.5, 0.7] },
            wakeup: WakeupScheme::NPolicy { n: 2 },
            setup: Distribution::Gamma { shape: 2.0, scale: 1.0 },
            power: PowerProfile::new(2.1, 1.1, 0.3, 1.8),
        };
        for i in 0..2 {
            let a = paoi(&cfg, i).unwrap();
            let b = paoi_expanded(&cfg, i).unwrap();
            assert!((a - b).abs() < 1e-9 * b, "source {i}: {a} vs {b}");
        }
    }

    #[test]
    fn theta_inversion_round_trip() {
        let dists = [
            Distribution::Exponential { rate: 1.3 },
            Distribution::Gamma { shape: 0.5, scale: 4.0 },
            Distribution::Uniform { low: 0.1, high: 2.0 },
            Distribution::Deterministic { value: 1.7 },
        ];
        for d in dists {
            for &theta in &[1.0, 0.9, 0.5, 0.1, 1e-3] {
                let b = theta_to_cs_rate(&d, theta).unwrap();
                let back = d.lst_raw(b);
                assert!((back - theta).abs() <= 1e-10, "{d:?} theta={theta}: {back}");
            }
            assert_eq!(theta_to_cs_rate(&d, 0.0).unwrap(), f64::INFINITY);
        }
        assert!(theta_to_cs_rate(&Distribution::Zero, 0.5).is_err());
    }

    #[test]
    fn lcfs_zero_sleep_equals_theta_zero_paoi() {
        let h = Distribution::Exponential { rate: 1.0 };
        let u = Distribution::Zero;
        let a0 = lcfs_paoi(0.5, &h, &u, 0.0, 3).unwrap();
        let a1 = lcfs_paoi(0.5, &h, &u, 1.0, 1).unwrap();
        assert!((a0 - a1).abs() < 1e-12);
        // energy agrees too once sleeping is as expensive as idling
        let p = PowerProfile::new(2.1, 1.1, 1.1, 0.5);
        let e0 = lcfs_energy(0.5, &h, &u, 0.0, 3, &p).unwrap();
        let e1 = lcfs_energy(0.5, &h, &u, 1.0, 1, &p).unwrap();
        assert!((e0 - e1).abs() < 1e-12);
    }

    #[test]
    fn lcfs_rejects_unstable_load() {
        let h = Distribution::Exponential { rate: 1.0 };
        let u = Distribution::Zero;
        assert!(matches!(
            lcfs_paoi(1.0, &h, &u, 0.0, 1),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn multiple_sleep_zero_vacation_rejected() {
        let cfg = one_source(
            1.0,
            Distribution::Exponential { rate: 1.0 },
            IdlingScheme::Bs { theta: vec![0.5] },
            WakeupScheme::MultipleSleep { w: Distribution::Zero },
            Distribution::Zero,
        );
        assert!(energy_rate(&cfg).is_err());
        assert!(paoi(&cfg, 0).is_err());
    }
}
