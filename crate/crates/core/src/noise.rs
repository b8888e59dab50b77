//! Counter-keyed noise.
//!
//! Every draw is a pure function of `(seed, lane, replica, index)`: a fresh
//! generator is keyed for each address, so replica scheduling, thread count
//! and how many draws a neighbouring step consumed never change a value.
//! Two paths that share a [`NoiseStream`] see the same Brownian increments,
//! the same exponential clocks and the same uniform marks.

use rand::{Rng, RngCore};
use rand_distr::{Exp1, StandardNormal};
use rand_pcg::Pcg64Mcg;

/// Independent families of draws. Each lane is its own address space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    /// Gaussian increments, addressed by Euler step.
    Brownian = 1,
    /// Per-step exponential clock and uniform mark of the frozen-rate scheme.
    Clock = 2,
    /// Jump skeleton of the event-driven scheme, addressed by jump index.
    Skeleton = 3,
    /// Sample points for the assumption checkers and randomized sweeps.
    Sampling = 4,
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed, e.g. one per sweep case.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(tag.wrapping_add(0x51_7CC1_B727_220A)))
}

/// Deterministic, addressable source of all randomness for a family of replicas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    seed: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A stream that shares nothing with `self`; used for sub-simulations.
    pub fn fork(&self, tag: u64) -> Self {
        Self::new(derive_seed(self.seed, tag))
    }

    /// Generator for one address. Cheap enough to build once per Euler step.
    pub fn draws(&self, lane: Lane, replica: u64, index: u64) -> Draws {
        let a = mix64(self.seed ^ mix64(lane as u64));
        let b = mix64(a ^ replica.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        let hi = mix64(b ^ index);
        let lo = mix64(hi ^ 0xA076_1D64_78BD_642F);
        Draws {
            rng: Pcg64Mcg::new(((hi as u128) << 64) | (lo as u128)),
        }
    }
}

/// Sequential draws at one address.
pub struct Draws {
    rng: Pcg64Mcg,
}

impl Draws {
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn fill_normal(&mut self, out: &mut [f64], scale: f64) {
        for v in out.iter_mut() {
            *v = scale * self.normal();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_same_draws() {
        let s = NoiseStream::new(7);
        let a: Vec<f64> = {
            let mut d = s.draws(Lane::Brownian, 3, 11);
            (0..5).map(|_| d.normal()).collect()
        };
        let b: Vec<f64> = {
            let mut d = s.draws(Lane::Brownian, 3, 11);
            (0..5).map(|_| d.normal()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn addresses_are_distinct() {
        let s = NoiseStream::new(7);
        let u = |lane, r, i| s.draws(lane, r, i).uniform();
        assert_ne!(u(Lane::Brownian, 0, 0), u(Lane::Brownian, 0, 1));
        assert_ne!(u(Lane::Brownian, 0, 0), u(Lane::Brownian, 1, 0));
        assert_ne!(u(Lane::Brownian, 0, 0), u(Lane::Clock, 0, 0));
        assert_ne!(s.fork(1).seed(), s.fork(2).seed());
    }

    #[test]
    fn moments_look_right() {
        let s = NoiseStream::new(99);
        let n = 200_000;
        let (mut m, mut m2, mut e, mut u) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let mut d = s.draws(Lane::Clock, k, 0);
            let z = d.normal();
            m += z;
            m2 += z * z;
            e += d.exp1();
            u += d.uniform();
        }
        let n = n as f64;
        assert!((m / n).abs() < 0.01);
        assert!((m2 / n - 1.0).abs() < 0.01);
        assert!((e / n - 1.0).abs() < 0.01);
        assert!((u / n - 0.5).abs() < 0.005);
    }
}
