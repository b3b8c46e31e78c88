//! Simulation-vs-closed-form agreement on targeted configurations, plus the
//! simulator's own structural invariants. The broad randomized sweep lives in
//! the acceptance suite; these runs are smaller and aimed at specific
//! mechanisms (each idling scheme, each wakeup scheme, multi-source mixing).

mod common;

use agewake_core::analytic;
use agewake_core::config::{IdlingScheme, PowerProfile, SourceSpec, SystemConfig, WakeupScheme};
use agewake_core::dist::Distribution;
use agewake_core::sim::{simulate, Horizon, SimParams};
use common::{assert_oracle_agreement, run_sim, within_3se};

fn base_power() -> PowerProfile {
    PowerProfile { busy: 2.1, idle: 1.1, sleep: 0.3, setup: 1.8, detect: 0.15 }
}

#[test]
fn never_sleep_single_source_matches_known_values() {
    let cfg = SystemConfig {
        sources: vec![SourceSpec { rate: 1.0, service: Distribution::Exponential { rate: 1.0 } }],
        idling: IdlingScheme::Bs { theta: vec![0.0] },
        wakeup: WakeupScheme::NPolicy { n: 1 },
        setup: Distribution::Zero,
        power: base_power(),
    };
    let sim = run_sim(&cfg, 42, 1_000_000);
    within_3se(2.5, sim.report.per_source[0].aoi, sim.se.aoi[0], "aoi");
    within_3se(3.0, sim.report.per_source[0].paoi, sim.se.paoi[0], "paoi");
}

#[test]
fn cs_sleep_frequency_matches_lst() {
    // H ~ Exp(1), b = 1, theta = H*(1) = 0.5
    let cfg = SystemConfig {
        sources: vec![SourceSpec { rate: 1.0, service: Distribution::Exponential { rate: 1.0 } }],
        idling: IdlingScheme::Cs { b: vec![1.0] },
        wakeup: WakeupScheme::NPolicy { n: 2 },
        setup: Distribution::Exponential { rate: 2.0 },
        power: base_power(),
    };
    let sim = run_sim(&cfg, 11, 200_000);
    let z = (sim.sleep_frequency[0] - 0.5).abs() / sim.sleep_frequency_se[0];
    assert!(z < 3.0, "observed {} z {z}", sim.sleep_frequency[0]);
}

#[test]
fn oracle_each_idling_scheme_multi_source() {
    let sources = vec![
        SourceSpec { rate: 0.8, service: Distribution::Exponential { rate: 1.0 } },
        SourceSpec { rate: 1.2, service: Distribution::Gamma { shape: 2.0, scale: 0.4 } },
    ];
    let idlings: [IdlingScheme; 3] = [
        IdlingScheme::Ht {
            hysteresis: vec![
                Distribution::Deterministic { value: 0.45 },
                Distribution::Exponential { rate: 2.0 },
            ],
        },
        IdlingScheme::Bs { theta: vec![0.4, 0.7] },
        IdlingScheme::Cs { b: vec![1.5, 0.6] },
    ];
    for (j, idling) in idlings.into_iter().enumerate() {
        let cfg = SystemConfig {
            sources: sources.clone(),
            idling,
            wakeup: WakeupScheme::NPolicy { n: 2 },
            setup: Distribution::Gamma { shape: 2.0, scale: 1.0 },
            power: base_power(),
        };
        assert_oracle_agreement(&cfg, 100 + j as u64, 400_000, &format!("idling {j}"));
    }
}

#[test]
fn oracle_single_sleep_and_multiple_sleep() {
    for (j, wakeup) in [
        WakeupScheme::SingleSleep { w: Distribution::Gamma { shape: 0.7, scale: 1.1 } },
        WakeupScheme::SingleSleep { w: Distribution::Deterministic { value: 0.8 } },
        WakeupScheme::MultipleSleep { w: Distribution::Uniform { low: 0.1, high: 1.2 } },
        WakeupScheme::MultipleSleep { w: Distribution::Exponential { rate: 1.3 } },
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SystemConfig {
            sources: vec![
                SourceSpec { rate: 0.9, service: Distribution::Uniform { low: 0.2, high: 1.4 } },
                SourceSpec { rate: 0.5, service: Distribution::Exponential { rate: 1.2 } },
            ],
            idling: IdlingScheme::Cs { b: vec![0.9, 2.0] },
            wakeup,
            setup: Distribution::Exponential { rate: 1.5 },
            power: base_power(),
        };
        assert_oracle_agreement(&cfg, 200 + j as u64, 400_000, &format!("wakeup {j}"));
    }
}

#[test]
fn oracle_zero_setup_and_always_sleep() {
    // theta = 1 via CS b = 0, zero setup, N = 1: sleeping is timing-neutral
    let cfg = SystemConfig {
        sources: vec![SourceSpec { rate: 1.0, service: Distribution::Exponential { rate: 1.0 } }],
        idling: IdlingScheme::Cs { b: vec![0.0] },
        wakeup: WakeupScheme::NPolicy { n: 1 },
        setup: Distribution::Zero,
        power: base_power(),
    };
    let sim = run_sim(&cfg, 5, 300_000);
    within_3se(3.0, sim.report.per_source[0].paoi, sim.se.paoi[0], "paoi");
    within_3se(2.5, sim.report.per_source[0].aoi, sim.se.aoi[0], "aoi");
    assert!((sim.sleep_frequency[0] - 1.0).abs() < 1e-12);
}

#[test]
fn renewal_check_cycle_lengths() {
    let cfg = SystemConfig {
        sources: vec![
            SourceSpec { rate: 0.7, service: Distribution::Exponential { rate: 0.9 } },
            SourceSpec { rate: 1.1, service: Distribution::Deterministic { value: 0.6 } },
        ],
        idling: IdlingScheme::Ht {
            hysteresis: vec![
                Distribution::Uniform { low: 0.0, high: 1.0 },
                Distribution::Gamma { shape: 1.5, scale: 0.5 },
            ],
        },
        wakeup: WakeupScheme::NPolicy { n: 3 },
        setup: Distribution::Uniform { low: 0.1, high: 0.9 },
        power: base_power(),
    };
    let sim = run_sim(&cfg, 77, 400_000);
    for i in 0..2 {
        let (m1, m2) = analytic::cycle_moments(&cfg, i).unwrap();
        let var = m2 - m1 * m1;
        let se = (var / sim.cycle_counts[i] as f64).sqrt();
        within_3se(m1, sim.mean_cycle_length[i], se, &format!("cycle mean [{i}]"));
    }
}

#[test]
fn determinism_and_internal_consistency() {
    let cfg = SystemConfig {
        sources: vec![
            SourceSpec { rate: 0.6, service: Distribution::Gamma { shape: 0.5, scale: 1.2 } },
            SourceSpec { rate: 0.9, service: Distribution::Exponential { rate: 1.4 } },
        ],
        idling: IdlingScheme::Bs { theta: vec![0.5, 0.3] },
        wakeup: WakeupScheme::MultipleSleep { w: Distribution::Exponential { rate: 1.0 } },
        setup: Distribution::Gamma { shape: 2.0, scale: 0.3 },
        power: base_power(),
    };
    let params = SimParams {
        config: cfg.clone(),
        horizon: Horizon::Cycles(60_000),
        seed: 31337,
        warmup_cycles: 1_000,
    };
    let a = simulate(&params).unwrap();
    let b = simulate(&params).unwrap();
    assert_eq!(a.report, b.report, "identical params must give identical results");
    assert_eq!(a.total_time.to_bits(), b.total_time.to_bits());

    assert!((a.state_fractions.sum() - 1.0).abs() < 1e-9);
    let f = &a.state_fractions;
    let p = &cfg.power;
    let recon = f.busy * p.busy
        + f.idle * p.idle
        + f.sleep * p.sleep
        + f.setup * p.setup
        + a.detections as f64 * p.detect / a.total_time;
    assert!(
        (a.report.energy_rate - recon).abs() < 1e-9,
        "energy {} vs state reconstruction {recon}",
        a.report.energy_rate
    );
}

#[test]
fn expected_wait_identity_verified_by_simulation() {
    // E[G] under the N-policy equals sleep_weight * (1 - U*(lambda))/lambda;
    // PAoI = E[G] + E[I] + E[H] isolates it once E[I] and E[H] are known.
    let cfg = SystemConfig {
        sources: vec![SourceSpec { rate: 2.0, service: Distribution::Exponential { rate: 1.0 } }],
        idling: IdlingScheme::Bs { theta: vec![1.0] },
        wakeup: WakeupScheme::NPolicy { n: 4 },
        setup: Distribution::Deterministic { value: 1.0 },
        power: base_power(),
    };
    let sim = run_sim(&cfg, 9, 400_000);
    let expect = 5.0 + (1.0 - (-2.0f64).exp()) / 2.0;
    within_3se(expect, sim.report.per_source[0].paoi, sim.se.paoi[0], "paoi with setup wait");
}
