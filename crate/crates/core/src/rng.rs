//! Deterministic random number generation.
//!
//! The simulator is the ground-truth oracle for every closed form, so frozen
//! test values depend on draws being bit-stable for the life of the artifact.
//! A self-contained xoshiro256++ keeps that guarantee independent of external
//! crate versions and works in `no_std`.

use crate::math;

#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s, spare_normal: None }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn u01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    #[inline]
    pub fn u01_open(&mut self) -> f64 {
        1.0 - self.u01()
    }

    /// Exponential with the given rate; rate 0 yields +inf, rate +inf yields 0.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        if rate == f64::INFINITY {
            return 0.0;
        }
        -math::ln(self.u01_open()) / rate
    }

    /// Standard normal via the polar (Marsaglia) method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let x = 2.0 * self.u01() - 1.0;
            let y = 2.0 * self.u01() - 1.0;
            let r2 = x * x + y * y;
            if r2 > 0.0 && r2 < 1.0 {
                let f = math::sqrt(-2.0 * math::ln(r2) / r2);
                self.spare_normal = Some(y * f);
                return x * f;
            }
        }
    }

    /// Gamma(shape, scale) draw (Marsaglia-Tsang, with the shape < 1 boost).
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0, scale);
            return g * math::powf(self.u01_open(), 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / math::sqrt(9.0 * d);
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.u01_open();
            if u < 1.0 - 0.0331 * x * x * x * x {
                return d * v * scale;
            }
            if math::ln(u) < 0.5 * x * x + d * (1.0 - v + math::ln(v)) {
                return d * v * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(43);
        assert_ne!(Rng::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn u01_in_range() {
        let mut r = Rng::new(7);
        for _ in 0..10_000 {
            let u = r.u01();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn gamma_moments_close() {
        let mut r = Rng::new(11);
        let (shape, scale) = (0.5, 4.0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let x = r.gamma(shape, scale);
            assert!(x >= 0.0);
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let m2 = sq / n as f64;
        assert!((mean - 2.0).abs() < 0.05, "mean {mean}");
        assert!((m2 - 12.0).abs() < 0.6, "m2 {m2}");
    }
}
