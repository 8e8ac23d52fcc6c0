//! Reproducible random substreams.
//!
//! A stream is identified by `(master, index)`. Its 64-bit seed is the
//! SplitMix64 finalizer applied to `master + index · 0x9E3779B97F4A7C15`
//! (wrapping), and the generator is xoshiro256++ seeded from that value
//! through `SeedableRng::seed_from_u64`. Gaussian variates use Box–Muller on
//! 53-bit uniforms.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub master: u64,
    pub index: u64,
}

impl SeedStream {
    pub fn new(master: u64, index: u64) -> Self {
        Self { master, index }
    }

    pub fn seed(&self) -> u64 {
        splitmix64_finalize(self.master.wrapping_add(self.index.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// A sibling stream in a disjoint index range, for auxiliary draws
    /// (reference samples, retries) that must not collide with trial indices.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            master: splitmix64_finalize(self.master ^ salt.wrapping_mul(GOLDEN_GAMMA)),
            index: self.index,
        }
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(self.seed()),
        }
    }
}

/// Generator attached to one [`SeedStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: Xoshiro256PlusPlus,
}

impl StreamRng {
    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform53(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard complex Gaussian with density e^{-|z|²}/π, so E|z|² = 1 and
    /// each part is N(0, 1/2). One Box–Muller pair per draw.
    #[inline]
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let u1 = 1.0 - self.uniform53(); // (0, 1]
        let u2 = self.uniform53();
        let radius = (-u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        Complex64::new(radius * c, radius * s)
    }

    /// Uniform index in `0..n`.
    pub fn index_below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
