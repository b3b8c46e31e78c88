//! Discrete-event simulation of the sleep-wake M/G/1/1 system.
//!
//! This is the ground-truth oracle for every closed form in [`crate::analytic`]
//! and the only evaluator for configurations without one. Semantics:
//!
//! 1. superposed Poisson arrivals; the class of each arrival is drawn with
//!    probability lambda_i / lambda;
//! 2. arrivals during a service are rejected;
//! 3. an arrival during idle starts service immediately;
//! 4. after a completed class-i service of realized length h the idling
//!    scheme decides: HT draws D_i and idles until min(arrival, D_i); BS
//!    sleeps with probability theta_i; CS draws B ~ Exponential(b_i) and
//!    sleeps iff h < B (the draw is explicit so the service/sleep correlation
//!    is physically present, not replaced by its marginal probability);
//! 5. N-policy sleep ends at the N-th arrival since sleep start; single-sleep
//!    sleeps exactly one W then sets up; multiple-sleep repeats W-length
//!    vacations until the buffer is nonempty at a wake check, charging the
//!    detect energy once per check;
//! 6. the one-packet buffer keeps only the newest arrival during sleep and
//!    setup;
//! 7. at setup end the buffered packet (if any) enters service.
//!
//! Ages integrate exactly over linear segments; energy integrates power over
//! state occupancy plus the per-check detect charges. Ties between an arrival
//! and a timer at the same instant resolve arrival-first (only deterministic
//! distributions can produce them).

use alloc::vec;
use alloc::vec::Vec;

use crate::config::{IdlingScheme, SystemConfig, WakeupScheme};
use crate::error::{Error, Result};
use crate::report::{Method, MetricsReport, SourceMetrics};
use crate::rng::Rng;

pub const DEFAULT_BATCHES: usize = 32;
pub const DEFAULT_WARMUP_CYCLES: u64 = 1_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// Total number of regenerative cycles (service start to service start),
    /// including warmup.
    Cycles(u64),
    /// Total simulated time.
    Time(f64),
}

#[derive(Clone, Debug)]
pub struct SimParams {
    pub config: SystemConfig,
    pub horizon: Horizon,
    pub seed: u64,
    pub warmup_cycles: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateFractions {
    pub busy: f64,
    pub idle: f64,
    pub sleep: f64,
    pub setup: f64,
}

impl StateFractions {
    pub fn sum(&self) -> f64 {
        self.busy + self.idle + self.sleep + self.setup
    }
}

/// Batch-means standard errors of the headline estimates.
#[derive(Clone, Debug, Default)]
pub struct StdErrors {
    pub aoi: Vec<f64>,
    pub paoi: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub report: MetricsReport,
    pub se: StdErrors,
    /// Informative (served) packets per source in the measurement window.
    pub informative: Vec<u64>,
    /// Observed sleep frequency after class-i completions.
    pub sleep_frequency: Vec<f64>,
    /// Binomial standard error of each observed sleep frequency.
    pub sleep_frequency_se: Vec<f64>,
    /// Duration of the measurement window.
    pub total_time: f64,
    pub state_fractions: StateFractions,
    /// Multiple-sleep wake checks in the window.
    pub detections: u64,
    /// Measured regenerative cycles.
    pub cycles: u64,
    /// Mean class-i cycle length (renewal check against cycle moments).
    pub mean_cycle_length: Vec<f64>,
    /// Measured class-i cycle counts.
    pub cycle_counts: Vec<u64>,
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    Busy { end: f64, class: usize, gen: f64, dur: f64 },
    Idle { deadline: f64 },
    SleepN { arrived: u32 },
    SleepSingle { wake: f64 },
    SleepMulti { check: f64 },
    Setup { end: f64 },
}

#[derive(Clone, Copy)]
struct Packet {
    class: usize,
    gen: f64,
}

struct Accum {
    duration: f64,
    age_int: Vec<f64>,
    peak_sum: Vec<f64>,
    peak_cnt: Vec<u64>,
    energy_int: f64,
}

impl Accum {
    fn new(k: usize) -> Self {
        Accum {
            duration: 0.0,
            age_int: vec![0.0; k],
            peak_sum: vec![0.0; k],
            peak_cnt: vec![0; k],
            energy_int: 0.0,
        }
    }
}

pub fn simulate(params: &SimParams) -> Result<SimResult> {
    let cfg = &params.config;
    cfg.validate()?;
    let k = cfg.num_sources();
    let lambda = cfg.total_rate();
    let warmup = params.warmup_cycles;
    let measured_target = match params.horizon {
        Horizon::Cycles(total) => {
            if total <= warmup {
                return Err(Error::InsufficientHorizon);
            }
            Some(total - warmup)
        }
        Horizon::Time(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InsufficientHorizon);
            }
            None
        }
    };
    let time_end = match params.horizon {
        Horizon::Time(t) => t,
        Horizon::Cycles(_) => f64::INFINITY,
    };
    let batch_size = measured_target.map(|m| (m / DEFAULT_BATCHES as u64).max(1));

    let mut rng = Rng::new(params.seed);
    let mut now = 0.0f64;
    let mut phase = Phase::Idle { deadline: f64::INFINITY };
    let mut buffer: Option<Packet> = None;
    let mut next_arrival = rng.exp(lambda);
    let mut delivered_gen = vec![0.0f64; k];

    // cycle bookkeeping
    let mut service_starts: u64 = 0;
    let mut measuring = false;
    let mut finished = false;
    let mut t_start = 0.0f64;
    let mut last_start: Option<(usize, f64)> = None;

    // measurement accumulators
    let mut total = Accum::new(k);
    let mut batches: Vec<Accum> = (0..DEFAULT_BATCHES).map(|_| Accum::new(k)).collect();
    let mut batch_idx: usize = 0;
    let mut state_time = [0.0f64; 4]; // busy, idle, sleep, setup
    let mut detections: u64 = 0;
    let mut sleeps = vec![0u64; k];
    let mut decisions = vec![0u64; k];
    let mut cycle_len_sum = vec![0.0f64; k];
    let mut cycle_len_cnt = vec![0u64; k];

    let class_probs: Vec<f64> = cfg.sources.iter().map(|s| s.rate / lambda).collect();
    let power = cfg.power;

    macro_rules! phase_power {
        ($p:expr) => {
            match $p {
                Phase::Busy { .. } => power.busy,
                Phase::Idle { .. } => power.idle,
                Phase::SleepN { .. } | Phase::SleepSingle { .. } | Phase::SleepMulti { .. } => {
                    power.sleep
                }
                Phase::Setup { .. } => power.setup,
            }
        };
    }
    macro_rules! state_slot {
        ($p:expr) => {
            match $p {
                Phase::Busy { .. } => 0usize,
                Phase::Idle { .. } => 1,
                Phase::SleepN { .. } | Phase::SleepSingle { .. } | Phase::SleepMulti { .. } => 2,
                Phase::Setup { .. } => 3,
            }
        };
    }

    while !finished {
        let timer = match phase {
            Phase::Busy { end, .. } => end,
            Phase::Idle { deadline } => deadline,
            Phase::SleepN { .. } => f64::INFINITY,
            Phase::SleepSingle { wake } => wake,
            Phase::SleepMulti { check } => check,
            Phase::Setup { end } => end,
        };
        // arrival-before-timer at exact ties
        let arrival_first = next_arrival <= timer;
        let t_next = if arrival_first { next_arrival } else { timer };

        if t_next >= time_end {
            // time horizon: close the last partial segment and stop
            if measuring {
                let dt = time_end - now;
                advance(
                    &mut total,
                    &mut batches[batch_idx],
                    dt,
                    now,
                    &delivered_gen,
                    phase_power!(phase),
                );
                state_time[state_slot!(phase)] += dt;
            }
            now = time_end;
            break;
        }

        let dt = t_next - now;
        if measuring {
            // time-mode batches are indexed by segment start time
            if measured_target.is_none() {
                let slice = (time_end - t_start) / DEFAULT_BATCHES as f64;
                batch_idx = (((now - t_start) / slice) as usize).min(DEFAULT_BATCHES - 1);
            }
            advance(
                &mut total,
                &mut batches[batch_idx],
                dt,
                now,
                &delivered_gen,
                phase_power!(phase),
            );
            state_time[state_slot!(phase)] += dt;
        }
        now = t_next;

        if arrival_first {
            // draw the class, then schedule the next arrival
            let u = rng.u01();
            let mut class = k - 1;
            let mut acc = 0.0;
            for (c, p) in class_probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    class = c;
                    break;
                }
            }
            next_arrival = now + rng.exp(lambda);
            let pkt = Packet { class, gen: now };
            match phase {
                Phase::Busy { .. } => {} // rejected
                Phase::Idle { .. } => {
                    start_service(
                        &mut phase,
                        &mut rng,
                        cfg,
                        pkt,
                        now,
                        &mut service_starts,
                        warmup,
                        measured_target,
                        batch_size,
                        &mut measuring,
                        &mut finished,
                        &mut t_start,
                        &mut batch_idx,
                        &mut last_start,
                        &mut cycle_len_sum,
                        &mut cycle_len_cnt,
                    );
                }
                Phase::SleepN { arrived } => {
                    buffer = Some(pkt);
                    let arrived = arrived + 1;
                    let n = match cfg.wakeup {
                        WakeupScheme::NPolicy { n } => n,
                        _ => unreachable!(),
                    };
                    if arrived >= n {
                        let u_dur = cfg.setup.sample(&mut rng);
                        phase = Phase::Setup { end: now + u_dur };
                    } else {
                        phase = Phase::SleepN { arrived };
                    }
                }
                Phase::SleepSingle { .. } | Phase::SleepMulti { .. } | Phase::Setup { .. } => {
                    buffer = Some(pkt);
                }
            }
        } else {
            match phase {
                Phase::Busy { class, gen, dur, .. } => {
                    // delivery: age peak just before the drop
                    if measuring {
                        let peak = now - delivered_gen[class];
                        total.peak_sum[class] += peak;
                        total.peak_cnt[class] += 1;
                        batches[batch_idx].peak_sum[class] += peak;
                        batches[batch_idx].peak_cnt[class] += 1;
                    }
                    delivered_gen[class] = gen;

                    // idling decision
                    if measuring {
                        decisions[class] += 1;
                    }
                    match &cfg.idling {
                        IdlingScheme::Ht { hysteresis } => {
                            // outcome resolved by the arrival/deadline race;
                            // the sleep counter updates when the deadline wins
                            let d = hysteresis[class].sample(&mut rng);
                            phase = Phase::Idle { deadline: now + d };
                        }
                        IdlingScheme::Bs { theta } => {
                            let sleep_now = rng.u01() < theta[class];
                            if sleep_now {
                                if measuring {
                                    sleeps[class] += 1;
                                }
                                enter_sleep(&mut phase, &mut rng, cfg, now);
                            } else {
                                phase = Phase::Idle { deadline: f64::INFINITY };
                            }
                        }
                        IdlingScheme::Cs { b } => {
                            let threshold = rng.exp(b[class]);
                            if dur < threshold {
                                if measuring {
                                    sleeps[class] += 1;
                                }
                                enter_sleep(&mut phase, &mut rng, cfg, now);
                            } else {
                                phase = Phase::Idle { deadline: f64::INFINITY };
                            }
                        }
                    }
                }
                Phase::Idle { .. } => {
                    // hysteresis expired: sleep
                    if measuring {
                        if let Some((class, _)) = last_start {
                            sleeps[class] += 1;
                        }
                    }
                    enter_sleep(&mut phase, &mut rng, cfg, now);
                }
                Phase::SleepSingle { .. } => {
                    let u_dur = cfg.setup.sample(&mut rng);
                    phase = Phase::Setup { end: now + u_dur };
                }
                Phase::SleepMulti { .. } => {
                    if measuring {
                        detections += 1;
                        batches[batch_idx].energy_int += power.detect;
                        total.energy_int += power.detect;
                    }
                    if buffer.is_some() {
                        let u_dur = cfg.setup.sample(&mut rng);
                        phase = Phase::Setup { end: now + u_dur };
                    } else {
                        let w = match &cfg.wakeup {
                            WakeupScheme::MultipleSleep { w } => w.sample(&mut rng),
                            _ => unreachable!(),
                        };
                        phase = Phase::SleepMulti { check: now + w };
                    }
                }
                Phase::Setup { .. } => match buffer.take() {
                    Some(pkt) => {
                        start_service(
                            &mut phase,
                            &mut rng,
                            cfg,
                            pkt,
                            now,
                            &mut service_starts,
                            warmup,
                            measured_target,
                            batch_size,
                            &mut measuring,
                            &mut finished,
                            &mut t_start,
                            &mut batch_idx,
                            &mut last_start,
                            &mut cycle_len_sum,
                            &mut cycle_len_cnt,
                        );
                    }
                    None => {
                        phase = Phase::Idle { deadline: f64::INFINITY };
                    }
                },
                Phase::SleepN { .. } => unreachable!("N-policy sleep has no timer"),
            }
        }
    }

    if !measuring && !finished {
        return Err(Error::InsufficientHorizon);
    }
    let t_end = now;
    let window = t_end - t_start;
    if window <= 0.0 || total.duration <= 0.0 {
        return Err(Error::InsufficientHorizon);
    }

    // point estimates from the whole window
    let measured_cycles = service_starts.saturating_sub(warmup + 1);
    let mut per_source = Vec::with_capacity(k);
    let mut se_aoi = Vec::with_capacity(k);
    let mut se_paoi = Vec::with_capacity(k);
    let mut sleep_freq = Vec::with_capacity(k);
    let mut sleep_freq_se = Vec::with_capacity(k);
    for i in 0..k {
        let aoi = total.age_int[i] / window;
        let paoi = total.peak_sum[i] / total.peak_cnt[i].max(1) as f64;
        let (aoi_se, paoi_se) = batch_se(&batches, i);
        let freq = sleeps[i] as f64 / decisions[i].max(1) as f64;
        let freq_se =
            crate::math::sqrt(freq * (1.0 - freq) / decisions[i].max(1) as f64);
        per_source.push(SourceMetrics {
            aoi,
            paoi,
            theta: freq,
            aoi_ci: Some(t975(DEFAULT_BATCHES - 1) * aoi_se),
            paoi_ci: Some(t975(DEFAULT_BATCHES - 1) * paoi_se),
        });
        se_aoi.push(aoi_se);
        se_paoi.push(paoi_se);
        sleep_freq.push(freq);
        sleep_freq_se.push(freq_se);
    }
    let energy_rate = total.energy_int / window;
    let energy_se = batch_energy_se(&batches);

    let fractions = StateFractions {
        busy: state_time[0] / window,
        idle: state_time[1] / window,
        sleep: state_time[2] / window,
        setup: state_time[3] / window,
    };

    Ok(SimResult {
        report: MetricsReport {
            per_source,
            energy_rate,
            energy_ci: Some(t975(DEFAULT_BATCHES - 1) * energy_se),
            method: Method::Simulated,
        },
        se: StdErrors { aoi: se_aoi, paoi: se_paoi, energy: energy_se },
        informative: total.peak_cnt.clone(),
        sleep_frequency: sleep_freq,
        sleep_frequency_se: sleep_freq_se,
        total_time: window,
        state_fractions: fractions,
        detections,
        cycles: measured_cycles,
        mean_cycle_length: cycle_len_sum
            .iter()
            .zip(&cycle_len_cnt)
            .map(|(s, c)| s / (*c).max(1) as f64)
            .collect(),
        cycle_counts: cycle_len_cnt,
    })
}

fn advance(
    total: &mut Accum,
    batch: &mut Accum,
    dt: f64,
    now: f64,
    delivered_gen: &[f64],
    pwr: f64,
) {
    total.duration += dt;
    batch.duration += dt;
    let e = pwr * dt;
    total.energy_int += e;
    batch.energy_int += e;
    for (i, g) in delivered_gen.iter().enumerate() {
        // age runs linearly from (now - g): integral = age*dt + dt^2/2
        let seg = (now - g) * dt + 0.5 * dt * dt;
        total.age_int[i] += seg;
        batch.age_int[i] += seg;
    }
}

#[allow(clippy::too_many_arguments)]
fn start_service(
    phase: &mut Phase,
    rng: &mut Rng,
    cfg: &SystemConfig,
    pkt: Packet,
    now: f64,
    service_starts: &mut u64,
    warmup: u64,
    measured_target: Option<u64>,
    batch_size: Option<u64>,
    measuring: &mut bool,
    finished: &mut bool,
    t_start: &mut f64,
    batch_idx: &mut usize,
    last_start: &mut Option<(usize, f64)>,
    cycle_len_sum: &mut [f64],
    cycle_len_cnt: &mut [u64],
) {
    *service_starts += 1;
    let s = *service_starts;
    if *measuring {
        if let Some((prev_class, prev_t)) = *last_start {
            cycle_len_sum[prev_class] += now - prev_t;
            cycle_len_cnt[prev_class] += 1;
        }
    }
    if s == warmup + 1 {
        *measuring = true;
        *t_start = now;
    }
    if let (Some(target), Some(bs)) = (measured_target, batch_size) {
        if s > warmup {
            let m = s - (warmup + 1); // completed measured cycles
            if m >= target {
                *finished = true;
                return;
            }
            *batch_idx = ((m / bs) as usize).min(DEFAULT_BATCHES - 1);
        }
    }
    *last_start = Some((pkt.class, now));
    let dur = cfg.sources[pkt.class].service.sample(rng);
    *phase = Phase::Busy { end: now + dur, class: pkt.class, gen: pkt.gen, dur };
}

fn enter_sleep(phase: &mut Phase, rng: &mut Rng, cfg: &SystemConfig, now: f64) {
    *phase = match &cfg.wakeup {
        WakeupScheme::NPolicy { .. } => Phase::SleepN { arrived: 0 },
        WakeupScheme::SingleSleep { w } => Phase::SleepSingle { wake: now + w.sample(rng) },
        WakeupScheme::MultipleSleep { w } => Phase::SleepMulti { check: now + w.sample(rng) },
    };
}

/// Standard errors of the batch means for source i (AoI, PAoI).
fn batch_se(batches: &[Accum], i: usize) -> (f64, f64) {
    let aoi: Vec<f64> = batches
        .iter()
        .filter(|b| b.duration > 0.0)
        .map(|b| b.age_int[i] / b.duration)
        .collect();
    let paoi: Vec<f64> = batches
        .iter()
        .filter(|b| b.peak_cnt[i] > 0)
        .map(|b| b.peak_sum[i] / b.peak_cnt[i] as f64)
        .collect();
    (mean_se(&aoi), mean_se(&paoi))
}

fn batch_energy_se(batches: &[Accum]) -> f64 {
    let vals: Vec<f64> = batches
        .iter()
        .filter(|b| b.duration > 0.0)
        .map(|b| b.energy_int / b.duration)
        .collect();
    mean_se(&vals)
}

fn mean_se(vals: &[f64]) -> f64 {
    let n = vals.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    crate::math::sqrt(var / n as f64)
}

/// Two-sided 97.5% Student-t quantile; exact at the default batch count.
fn t975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::NAN
    } else if df <= 30 {
        TABLE[df - 1]
    } else {
        1.96 + 2.5 / df as f64
    }
}
