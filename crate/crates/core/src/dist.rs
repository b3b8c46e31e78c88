//! Nonnegative service/setup/vacation distributions with exact
//! Laplace-Stieltjes transforms.
//!
//! Every closed-form metric in this crate consumes LST values and LST
//! derivatives, so only variants with closed-form transforms are supported;
//! there is deliberately no quadrature fallback. Derivative orders up to 4
//! are available (the formulas need at most 2).
//!
//! | Variant | X*(s) | mean | CV |
//! |---|---|---|---|
//! | `Zero` | 1 | 0 | 0 (by definition) |
//! | `Deterministic{value:c}` | e^(-sc) | c | 0 |
//! | `Exponential{rate:r}` | r/(r+s) | 1/r | 1 |
//! | `Gamma{shape:a, scale:b}` | (1+bs)^(-a) | ab | 1/sqrt(a) |
//! | `Uniform{low, high}` | (e^(-s*low)-e^(-s*high))/(s(high-low)) | (low+high)/2 | — |

use crate::error::{ConfigError, Error, Result};
use crate::jet::Jet2;
use crate::math;
use crate::rng::Rng;

/// Highest supported LST derivative order.
pub const MAX_DERIV_ORDER: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "type", rename_all = "lowercase")
)]
pub enum Distribution {
    /// Point mass at `value` >= 0.
    Deterministic { value: f64 },
    /// Exponential with `rate` > 0.
    Exponential { rate: f64 },
    /// Gamma in (shape, scale) parametrization: mean = shape*scale.
    Gamma { shape: f64, scale: f64 },
    /// Uniform on [low, high], 0 <= low < high.
    Uniform { low: f64, high: f64 },
    /// Point mass at 0; stands in for "no setup" / "no hysteresis".
    Zero,
}

impl Distribution {
    pub fn deterministic(value: f64) -> Result<Self, ConfigError> {
        let d = Distribution::Deterministic { value };
        d.validate().map(|_| d)
    }

    pub fn exponential(rate: f64) -> Result<Self, ConfigError> {
        let d = Distribution::Exponential { rate };
        d.validate().map(|_| d)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self, ConfigError> {
        let d = Distribution::Gamma { shape, scale };
        d.validate().map(|_| d)
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self, ConfigError> {
        let d = Distribution::Uniform { low, high };
        d.validate().map(|_| d)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let ok = match *self {
            Distribution::Deterministic { value } => value.is_finite() && value >= 0.0,
            Distribution::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Distribution::Gamma { shape, scale } => {
                shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0
            }
            Distribution::Uniform { low, high } => {
                low.is_finite() && high.is_finite() && low >= 0.0 && high > low
            }
            Distribution::Zero => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::BadDistribution(match self {
                Distribution::Deterministic { .. } => "deterministic needs value >= 0",
                Distribution::Exponential { .. } => "exponential needs rate > 0",
                Distribution::Gamma { .. } => "gamma needs shape > 0 and scale > 0",
                Distribution::Uniform { .. } => "uniform needs 0 <= low < high",
                Distribution::Zero => unreachable!(),
            }))
        }
    }

    /// True when the variant has an atom at zero, i.e. X = 0 almost surely.
    pub fn is_zero(&self) -> bool {
        matches!(self, Distribution::Zero)
            || matches!(self, Distribution::Deterministic { value } if *value == 0.0)
    }

    /// E[e^(-sX)] for s >= 0 (closed form, exact).
    pub fn lst(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain("lst requires s >= 0"));
        }
        Ok(self.lst_raw(s))
    }

    /// d^k/ds^k E[e^(-sX)] for s >= 0, k <= 4; order 0 is the LST itself.
    pub fn lst_deriv(&self, s: f64, k: u32) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain("lst_deriv requires s >= 0"));
        }
        if k > MAX_DERIV_ORDER {
            return Err(Error::UnsupportedOrder { requested: k, max: MAX_DERIV_ORDER });
        }
        Ok(self.lst_deriv_raw(s, k))
    }

    /// E[X^k] for 1 <= k <= 4, via the derivative identity
    /// E[X^k] = (-1)^k * lst_deriv(0, k).
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 || k > MAX_DERIV_ORDER {
            return Err(Error::UnsupportedOrder { requested: k, max: MAX_DERIV_ORDER });
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * self.lst_deriv_raw(0.0, k))
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Zero => 0.0,
            _ => self.moment(1).expect("order 1 is always supported"),
        }
    }

    /// Coefficient of variation sqrt(Var X)/E[X]; defined as 0 for `Zero`.
    pub fn cv(&self) -> Result<f64> {
        if self.is_zero() && matches!(self, Distribution::Zero) {
            return Ok(0.0);
        }
        let mean = self.mean();
        if mean == 0.0 {
            return Err(Error::DivisionByZero("cv of a zero-mean variant"));
        }
        let m2 = self.moment(2)?;
        let var = (m2 - mean * mean).max(0.0);
        Ok(math::sqrt(var) / mean)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Zero => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -math::expm1(-rate * x)
                }
            }
            Distribution::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    math::gammp(shape, x / scale)
                }
            }
            Distribution::Uniform { low, high } => {
                if x <= low {
                    0.0
                } else if x >= high {
                    1.0
                } else {
                    (x - low) / (high - low)
                }
            }
        }
    }

    /// One draw; identical seed and call sequence give identical values.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Distribution::Zero => 0.0,
            Distribution::Deterministic { value } => value,
            Distribution::Exponential { rate } => rng.exp(rate),
            Distribution::Gamma { shape, scale } => rng.gamma(shape, scale),
            Distribution::Uniform { low, high } => low + rng.u01() * (high - low),
        }
    }

    pub(crate) fn lst_raw(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        if s == f64::INFINITY {
            // limit: the mass at 0 survives
            return if self.is_zero() { 1.0 } else { 0.0 };
        }
        match *self {
            Distribution::Zero => 1.0,
            Distribution::Deterministic { value } => {
                if value == 0.0 {
                    1.0
                } else {
                    math::exp(-s * value)
                }
            }
            Distribution::Exponential { rate } => rate / (rate + s),
            Distribution::Gamma { shape, scale } => math::powf(1.0 + scale * s, -shape),
            Distribution::Uniform { .. } => self.uniform_exp_moment(s, 0),
        }
    }

    pub(crate) fn lst_deriv_raw(&self, s: f64, k: u32) -> f64 {
        if k == 0 {
            return self.lst_raw(s);
        }
        if s == f64::INFINITY {
            return 0.0; // X^k e^(-sX) -> 0 pointwise on the support
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        match *self {
            Distribution::Zero => 0.0,
            Distribution::Deterministic { value } => {
                // (-c)^k e^(-sc)
                if value == 0.0 {
                    0.0
                } else {
                    math::powi(-value, k as i32) * math::exp(-s * value)
                }
            }
            Distribution::Exponential { rate } => {
                let mut fact = 1.0;
                for j in 2..=k {
                    fact *= j as f64;
                }
                sign * fact * rate / math::powi(rate + s, k as i32 + 1)
            }
            Distribution::Gamma { shape, scale } => {
                let mut rising = 1.0;
                for j in 0..k {
                    rising *= shape + j as f64;
                }
                sign * math::powi(scale, k as i32)
                    * rising
                    * math::powf(1.0 + scale * s, -shape - k as f64)
            }
            Distribution::Uniform { .. } => sign * self.uniform_exp_moment(s, k),
        }
    }

    /// E[X^k e^(-sX)] for the uniform variant, via X = low + w*Y with
    /// Y ~ U(0,1): a binomial expansion over J_j(sigma) = int_0^1 y^j e^(-sigma y) dy.
    fn uniform_exp_moment(&self, s: f64, k: u32) -> f64 {
        let (low, high) = match *self {
            Distribution::Uniform { low, high } => (low, high),
            _ => unreachable!(),
        };
        let w = high - low;
        let sigma = s * w;
        let mut j_vals = [0.0f64; (MAX_DERIV_ORDER + 1) as usize];
        if sigma < 0.5 {
            // series: J_j = sum_m (-sigma)^m / (m! (j+m+1)), exact at sigma = 0
            for (j, jv) in j_vals.iter_mut().enumerate() {
                let mut term = 1.0;
                let mut acc = 1.0 / (j as f64 + 1.0);
                for m in 1..30 {
                    term *= -sigma / m as f64;
                    acc += term / (j as f64 + m as f64 + 1.0);
                    if math::abs(term) < 1e-18 {
                        break;
                    }
                }
                *jv = acc;
            }
        } else {
            let e = math::exp(-sigma);
            j_vals[0] = -math::expm1(-sigma) / sigma;
            for j in 1..j_vals.len() {
                j_vals[j] = (j as f64 * j_vals[j - 1] - e) / sigma;
            }
        }
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom *= (k - j + 1) as f64 / j as f64;
            }
            sum += binom
                * math::powi(low, (k - j) as i32)
                * math::powi(w, j as i32)
                * j_vals[j as usize];
        }
        let scale = if low == 0.0 { 1.0 } else { math::exp(-s * low) };
        scale * sum
    }

    /// LST jet (value and first two s-derivatives) at base point `s0` >= 0.
    pub(crate) fn lst_jet(&self, s0: f64) -> Jet2 {
        Jet2 {
            v: self.lst_raw(s0),
            d1: self.lst_deriv_raw(s0, 1),
            d2: self.lst_deriv_raw(s0, 2),
        }
    }
}
