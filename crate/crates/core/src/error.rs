//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// Configuration rejection with enough context to point at the offending field.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// The source list is empty.
    NoSources,
    /// A per-source arrival rate is non-positive or non-finite.
    BadRate { source: usize, rate: f64 },
    /// An idling-scheme parameter vector does not match the source count.
    SchemeLength { expected: usize, got: usize },
    /// A Bernoulli sleep probability lies outside [0, 1].
    ThetaRange { source: usize, theta: f64 },
    /// A conditional-sleep threshold rate is negative or NaN.
    BadThreshold { source: usize, b: f64 },
    /// N-policy parameter below 1.
    BadN,
    /// Multiple-sleep with a zero-length vacation never wakes up.
    DegenerateWakeup,
    /// A distribution parameter violates its invariant.
    BadDistribution(&'static str),
    /// A power level is negative or non-finite.
    BadPower(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::NoSources => write!(f, "config needs at least one source"),
            ConfigError::BadRate { source, rate } => {
                write!(f, "sources[{source}].rate must be finite and > 0, got {rate}")
            }
            ConfigError::SchemeLength { expected, got } => write!(
                f,
                "idling parameter vector has {got} entries but there are {expected} sources"
            ),
            ConfigError::ThetaRange { source, theta } => {
                write!(f, "idling.theta[{source}] must lie in [0, 1], got {theta}")
            }
            ConfigError::BadThreshold { source, b } => {
                write!(f, "idling.b[{source}] must be >= 0, got {b}")
            }
            ConfigError::BadN => write!(f, "wakeup.n must be >= 1"),
            ConfigError::DegenerateWakeup => write!(
                f,
                "multiple-sleep wakeup requires a vacation with lst(w, lambda) < 1; \
                 a zero-length vacation loops forever"
            ),
            ConfigError::BadDistribution(what) => write!(f, "invalid distribution: {what}"),
            ConfigError::BadPower(which) => {
                write!(f, "power.{which} must be finite and >= 0")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Errors raised by analytic, simulation, optimization, and game operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A real argument left the operation's domain (e.g. negative transform
    /// argument, non-positive freshness target).
    Domain(&'static str),
    /// LST derivative order above the supported maximum.
    UnsupportedOrder { requested: u32, max: u32 },
    /// Division by zero, e.g. coefficient of variation of a zero-mean variant.
    DivisionByZero(&'static str),
    /// Invalid configuration.
    Config(ConfigError),
    /// Simulation horizon ends before the warmup completes.
    InsufficientHorizon,
    /// LCFS formulas need lambda * E[H] < 1.
    Unstable { rho: f64 },
    /// AoI shape analysis is undefined for theta = 0 (the server never sleeps,
    /// so N plays no role).
    UndefinedShape,
    /// A constrained search found no feasible point; the message names the
    /// tightest constraint.
    Infeasible(String),
    /// The Stage-II fixed-point equation has no root in the admissible bracket.
    NoEquilibrium,
    /// Game parameters force a non-positive equilibrium rate.
    InfeasibleParameters(&'static str),
    /// No N in the admissible range yields a feasible equilibrium.
    NoFeasibleN,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::UnsupportedOrder { requested, max } => {
                write!(f, "LST derivative order {requested} unsupported (max {max})")
            }
            Error::DivisionByZero(what) => write!(f, "division by zero: {what}"),
            Error::Config(e) => write!(f, "config error: {e}"),
            Error::InsufficientHorizon => {
                write!(f, "simulation horizon too small to complete warmup")
            }
            Error::Unstable { rho } => {
                write!(f, "LCFS system unstable: lambda * E[H] = {rho} >= 1")
            }
            Error::UndefinedShape => {
                write!(f, "AoI shape undefined for theta = 0 (server never sleeps)")
            }
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::NoEquilibrium => write!(f, "no equilibrium root in the rate bracket"),
            Error::InfeasibleParameters(what) => {
                write!(f, "infeasible game parameters: {what}")
            }
            Error::NoFeasibleN => write!(f, "no feasible N"),
        }
    }
}

impl core::error::Error for Error {}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e)
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
