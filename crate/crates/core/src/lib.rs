//! Information-freshness and energy analysis for multi-source sleep-wake
//! M/G/1/1 servers.
//!
//! The system: `k` Poisson sources feed a single server with a one-packet
//! buffer. After each service the server either idles or sleeps, governed by
//! an idling scheme (hysteresis time, Bernoulli sleep, or conditional sleep),
//! and a sleeping server is woken by an N-policy, a single-sleep, or a
//! multiple-sleep rule, after which it pays a setup time. The crate provides
//!
//! - [`dist`]: the distribution family used by every formula, with exact
//!   Laplace-Stieltjes transforms, LST derivatives, moments, and sampling;
//! - [`analytic`]: closed-form sleep probability, energy consumption rate,
//!   peak age of information (PAoI), and age of information (AoI) per source,
//!   plus the LCFS comparison formulas;
//! - [`sim`]: a discrete-event simulator of the same system, used as the
//!   ground-truth oracle for every closed form;
//! - [`optimize`]: energy minimization under PAoI/AoI constraints and the
//!   AoI-vs-N shape analysis;
//! - [`game`]: Stackelberg equilibrium sampling rates when sources choose
//!   their own rates subject to PAoI targets.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of `std` for freestanding builds.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("agewake-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod analytic;
pub mod config;
pub mod dist;
pub mod error;
pub mod game;
mod jet;
mod math;
pub mod optimize;
pub mod report;
pub mod rng;
pub mod sim;

pub use config::{
    IdlingScheme, PowerProfile, SourceSpec, SystemConfig, ValidationWarning, WakeupScheme,
};
pub use dist::Distribution;
pub use error::{ConfigError, Error};
pub use report::{MetricsReport, Method, SourceMetrics};
pub use rng::Rng;
