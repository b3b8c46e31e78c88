//! Shared helpers for the integration suites: seeded random configurations,
//! oracle-agreement checks, a brute-force search for the PAoI-constrained
//! relaxation, and an independent LCFS simulator.

#![allow(dead_code)]

use agewake_core::analytic;
use agewake_core::config::{IdlingScheme, PowerProfile, SourceSpec, SystemConfig, WakeupScheme};
use agewake_core::dist::Distribution;
use agewake_core::optimize::{energy_single, paoi_single};
use agewake_core::rng::Rng;
use agewake_core::sim::{simulate, Horizon, SimParams, SimResult};

pub fn uniform_in(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + rng.u01() * (hi - lo)
}

/// A random distribution with roughly the requested mean.
pub fn random_dist(rng: &mut Rng, mean_lo: f64, mean_hi: f64) -> Distribution {
    let mean = uniform_in(rng, mean_lo, mean_hi);
    match rng.next_u64() % 4 {
        0 => Distribution::Deterministic { value: mean },
        1 => Distribution::Exponential { rate: 1.0 / mean },
        2 => {
            let shape = uniform_in(rng, 0.4, 3.0);
            Distribution::Gamma { shape, scale: mean / shape }
        }
        _ => {
            let half = mean * uniform_in(rng, 0.3, 0.95);
            Distribution::Uniform { low: mean - half, high: mean + half }
        }
    }
}

/// Stratified random system: k cycles 1..3, idling and wakeup schemes cycle
/// through all nine combinations as `idx` increases.
pub fn random_config(idx: u64) -> SystemConfig {
    let mut rng = Rng::new(0x5eed_0000 + idx * 7919);
    let k = (idx % 3) as usize + 1;
    let idle_kind = (idx / 3) % 3;
    let wake_kind = (idx / 9) % 3;

    let sources: Vec<SourceSpec> = (0..k)
        .map(|_| SourceSpec {
            rate: uniform_in(&mut rng, 0.3, 1.6),
            service: random_dist(&mut rng, 0.4, 1.4),
        })
        .collect();
    let idling = match idle_kind {
        0 => IdlingScheme::Ht {
            hysteresis: (0..k).map(|_| random_dist(&mut rng, 0.2, 1.5)).collect(),
        },
        1 => IdlingScheme::Bs {
            theta: (0..k).map(|_| uniform_in(&mut rng, 0.1, 0.95)).collect(),
        },
        _ => IdlingScheme::Cs {
            b: (0..k).map(|_| uniform_in(&mut rng, 0.2, 3.0)).collect(),
        },
    };
    let wakeup = match wake_kind {
        0 => WakeupScheme::NPolicy { n: 1 + (rng.next_u64() % 5) as u32 },
        1 => WakeupScheme::SingleSleep { w: random_dist(&mut rng, 0.4, 1.5) },
        _ => WakeupScheme::MultipleSleep { w: random_dist(&mut rng, 0.4, 1.5) },
    };
    let setup = if rng.u01() < 0.2 {
        Distribution::Zero
    } else {
        random_dist(&mut rng, 0.2, 1.2)
    };
    let power = PowerProfile {
        busy: uniform_in(&mut rng, 1.5, 3.0),
        idle: uniform_in(&mut rng, 0.6, 1.4),
        sleep: uniform_in(&mut rng, 0.05, 0.35),
        setup: uniform_in(&mut rng, 0.6, 2.5),
        detect: uniform_in(&mut rng, 0.0, 0.3),
    };
    SystemConfig { sources, idling, wakeup, setup, power }
}

pub fn run_sim(cfg: &SystemConfig, seed: u64, measured_cycles: u64) -> SimResult {
    let warmup = 1_000;
    simulate(&SimParams {
        config: cfg.clone(),
        horizon: Horizon::Cycles(warmup + measured_cycles),
        seed,
        warmup_cycles: warmup,
    })
    .expect("simulation runs")
}

/// |analytic - simulated| <= 3 * batch-means SE, with a tiny absolute floor
/// for metrics whose batch spread can underflow (deterministic segments).
pub fn within_3se(analytic: f64, simulated: f64, se: f64, what: &str) {
    let tol = 3.0 * se + 1e-9 * analytic.abs().max(1.0);
    assert!(
        (analytic - simulated).abs() <= tol,
        "{what}: analytic {analytic} vs simulated {simulated} (se {se}, z {:.2})",
        (analytic - simulated).abs() / se
    );
}

fn check_3se(analytic: f64, simulated: f64, se: f64) -> bool {
    (analytic - simulated).abs() <= 3.0 * se + 1e-9 * analytic.abs().max(1.0)
}

/// Check every analytic metric of `cfg` against one simulation run. Suites
/// built on this make hundreds of 3-sigma comparisons, so a deterministic
/// tail miss is expected occasionally; one metric missing on the first seed
/// is retried under an independent seed and must pass there (a genuine
/// formula bias reproduces on every seed at these cycle counts).
pub fn assert_oracle_agreement(cfg: &SystemConfig, seed: u64, cycles: u64, label: &str) {
    let sim = run_sim(cfg, seed, cycles);
    let all_ok = |sim: &SimResult| -> Option<String> {
        let energy = analytic::energy_rate(cfg).unwrap();
        if !check_3se(energy, sim.report.energy_rate, sim.se.energy) {
            return Some(format!(
                "{label}: energy: analytic {energy} vs simulated {} (se {})",
                sim.report.energy_rate, sim.se.energy
            ));
        }
        for i in 0..cfg.num_sources() {
            let paoi = analytic::paoi(cfg, i).unwrap();
            let aoi = analytic::aoi(cfg, i).unwrap();
            let theta = analytic::sleep_probability(cfg, i).unwrap();
            if !check_3se(paoi, sim.report.per_source[i].paoi, sim.se.paoi[i]) {
                return Some(format!(
                    "{label}: paoi[{i}]: analytic {paoi} vs simulated {} (se {})",
                    sim.report.per_source[i].paoi, sim.se.paoi[i]
                ));
            }
            if !check_3se(aoi, sim.report.per_source[i].aoi, sim.se.aoi[i]) {
                return Some(format!(
                    "{label}: aoi[{i}]: analytic {aoi} vs simulated {} (se {})",
                    sim.report.per_source[i].aoi, sim.se.aoi[i]
                ));
            }
            if !check_3se(theta, sim.sleep_frequency[i], sim.sleep_frequency_se[i].max(1e-12)) {
                return Some(format!(
                    "{label}: theta[{i}]: analytic {theta} vs simulated {} (se {})",
                    sim.sleep_frequency[i], sim.sleep_frequency_se[i]
                ));
            }
        }
        None
    };
    if let Some(first_miss) = all_ok(&sim) {
        let retry = run_sim(cfg, seed ^ 0x5a5a_5a5a_0000_0001, cycles);
        if let Some(second_miss) = all_ok(&retry) {
            panic!("reproducible disagreement: {first_miss}; retry: {second_miss}");
        }
    }
}

/// Brute-force reference for the PAoI-constrained relaxation: a log-spaced
/// N grid crossed with a 1e-3 theta grid, plus the exact feasibility
/// boundary in each direction so grid quantization cannot mask the optimum.
pub struct BruteForceP3 {
    pub n: f64,
    pub theta: f64,
    pub energy: f64,
}

pub fn p3_brute_force(
    lambda: f64,
    service: &Distribution,
    setup: &Distribution,
    power: &PowerProfile,
    tau: f64,
    n_points: usize,
) -> Option<BruteForceP3> {
    let n_max = 1e4f64;
    let mut best: Option<BruteForceP3> = None;
    let consider = |n: f64, theta: f64, best: &mut Option<BruteForceP3>| {
        if !(0.0..=1.0).contains(&theta) || !(1.0..=n_max).contains(&n) {
            return;
        }
        if paoi_single(lambda, service, setup, n, theta) > tau + 1e-9 {
            return;
        }
        let e = energy_single(lambda, service, setup, power, n, theta);
        if best.as_ref().map_or(true, |b| e < b.energy) {
            *best = Some(BruteForceP3 { n, theta, energy: e });
        }
    };

    let base = 2.0 * service.mean() + 1.0 / lambda;
    let u_l = setup.lst(lambda).unwrap();
    let slope1 = |n: f64| n / lambda + setup.mean() - u_l / lambda;
    for i in 0..n_points {
        let n = 10f64.powf(4.0 * i as f64 / (n_points - 1) as f64);
        // full theta grid
        let mut t: f64 = 0.0;
        while t <= 1.0 + 1e-12 {
            consider(n, t.min(1.0), &mut best);
            t += 1e-3;
        }
        // exact feasibility edge at this n
        let s = slope1(n);
        if s > 0.0 {
            consider(n, ((tau - base) / s).clamp(0.0, 1.0), &mut best);
        }
    }
    // exact feasibility edge at each theta
    let mut t: f64 = 1e-3;
    while t <= 1.0 + 1e-12 {
        let theta = t.min(1.0);
        let n_edge = lambda
            * ((tau - base) / theta - setup.mean() + u_l / lambda);
        consider(n_edge.clamp(1.0, n_max), theta, &mut best);
        t += 1e-3;
    }
    best
}

// ---------------------------------------------------------------------------
// LCFS oracle: single source, unbounded stack, newest-first, serve-everything,
// conditional sleep + N-policy. Written directly from the model description,
// independent of the closed forms it checks.
// ---------------------------------------------------------------------------

pub struct LcfsResult {
    pub paoi: f64,
    pub paoi_se: f64,
    pub energy: f64,
    pub energy_se: f64,
}

pub fn simulate_lcfs(
    lambda: f64,
    service: &Distribution,
    setup: &Distribution,
    theta_b: f64, // conditional-sleep threshold rate
    n_policy: u32,
    power: &PowerProfile,
    seed: u64,
    completions: u64,
) -> LcfsResult {
    #[derive(PartialEq)]
    enum Ph {
        Busy,
        Idle,
        Sleep,
        Setup,
    }
    let mut rng = Rng::new(seed);
    let mut now = 0.0f64;
    let mut phase = Ph::Idle;
    let mut timer = f64::INFINITY;
    let mut cur: (f64, f64) = (0.0, 0.0); // (gen, dur) of packet in service
    let mut stack: Vec<f64> = Vec::new(); // generation times, newest last
    let mut next_arrival = rng.exp(lambda);
    let mut sleep_arrivals = 0u32;
    let mut delivered = 0.0f64;

    let warm = completions / 10;
    let mut served = 0u64;
    let mut measuring = false;
    const B: usize = 32;
    let mut peaks = vec![0.0f64; B];
    let mut counts = vec![0u64; B];
    let mut energy = vec![0.0f64; B];
    let mut durs = vec![0.0f64; B];
    let batch_of = |served: u64| -> usize {
        (((served.saturating_sub(warm)) * B as u64) / (completions + 1)) as usize % B
    };

    while served < warm + completions {
        let t_next = next_arrival.min(timer);
        if measuring {
            let dt = t_next - now;
            let b = batch_of(served);
            durs[b] += dt;
            energy[b] += dt * match phase {
                Ph::Busy => power.busy,
                Ph::Idle => power.idle,
                Ph::Sleep => power.sleep,
                Ph::Setup => power.setup,
            };
        }
        now = t_next;
        if next_arrival <= timer {
            stack.push(now);
            next_arrival = now + rng.exp(lambda);
            match phase {
                Ph::Idle => {
                    let gen = stack.pop().unwrap();
                    let dur = service.sample(&mut rng);
                    cur = (gen, dur);
                    phase = Ph::Busy;
                    timer = now + dur;
                }
                Ph::Sleep => {
                    sleep_arrivals += 1;
                    if sleep_arrivals >= n_policy {
                        phase = Ph::Setup;
                        timer = now + setup.sample(&mut rng);
                    }
                }
                _ => {}
            }
        } else {
            match phase {
                Ph::Busy => {
                    served += 1;
                    if served >= warm {
                        measuring = true;
                    }
                    let (gen, dur) = cur;
                    if gen > delivered {
                        if measuring {
                            let b = batch_of(served);
                            peaks[b] += now - delivered;
                            counts[b] += 1;
                        }
                        delivered = gen;
                    }
                    if let Some(gen) = stack.pop() {
                        let d = service.sample(&mut rng);
                        cur = (gen, d);
                        timer = now + d;
                    } else {
                        // conditional sleep on the just-finished service time
                        let threshold = rng.exp(theta_b);
                        if dur < threshold {
                            phase = Ph::Sleep;
                            sleep_arrivals = 0;
                            timer = f64::INFINITY;
                        } else {
                            phase = Ph::Idle;
                            timer = f64::INFINITY;
                        }
                    }
                }
                Ph::Setup => {
                    let gen = stack.pop().expect("setup follows a nonempty wake");
                    let d = service.sample(&mut rng);
                    cur = (gen, d);
                    phase = Ph::Busy;
                    timer = now + d;
                }
                _ => unreachable!(),
            }
        }
    }
    let paoi_b: Vec<f64> = (0..B)
        .filter(|&b| counts[b] > 0)
        .map(|b| peaks[b] / counts[b] as f64)
        .collect();
    let energy_b: Vec<f64> = (0..B)
        .filter(|&b| durs[b] > 0.0)
        .map(|b| energy[b] / durs[b])
        .collect();
    let (paoi, paoi_se) = mean_and_se(&paoi_b);
    let (energy, energy_se) = mean_and_se(&energy_b);
    LcfsResult { paoi, paoi_se, energy, energy_se }
}

pub fn mean_and_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
