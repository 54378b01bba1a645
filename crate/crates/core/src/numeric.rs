//! Small numeric helpers shared across estimators: count rounding, the
//! confidence-level newtype and seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The generator used everywhere in the crate. Seeded from a `u64` through
/// `ChaCha8Rng::seed_from_u64`.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SNAP_REL: f64 = 1e-12;

/// `⌈x⌉` for count formulas, snapping values that are an integer up to
/// floating-point noise (e.g. `18·ln(e)`) onto that integer.
pub fn ceil_count(x: f64) -> f64 {
    let r = x.round();
    if r != 0.0 && (x - r).abs() <= SNAP_REL * x.abs() {
        r
    } else {
        x.ceil()
    }
}

/// `⌊x⌋` with the same snapping as [`ceil_count`].
pub fn floor_count(x: f64) -> f64 {
    let r = x.round();
    if r != 0.0 && (x - r).abs() <= SNAP_REL * x.abs() {
        r
    } else {
        x.floor()
    }
}

/// A failure probability δ ∈ (0, 1), stored as `ln(1/δ)`.
///
/// Union bounds over exponentially many directions (δ/5^p) underflow quickly
/// in linear space, so every consumer reads the log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    log_inv: f64,
}

impl Confidence {
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self { log_inv: -delta.ln() })
    }

    pub fn from_log_inv(log_inv: f64) -> Result<Self> {
        if !(log_inv > 0.0 && log_inv.is_finite()) {
            return Err(Error::config(format!("ln(1/delta) must be positive and finite, got {log_inv}")));
        }
        Ok(Self { log_inv })
    }

    /// `ln(1/δ)`
    pub fn log_inv(self) -> f64 {
        self.log_inv
    }

    /// `ln(c/δ)`
    pub fn log_scaled(self, c: f64) -> f64 {
        c.ln() + self.log_inv
    }

    pub fn delta(self) -> f64 {
        (-self.log_inv).exp()
    }

    /// Confidence for one of `ln_count.exp()` events under a union bound,
    /// i.e. δ / count.
    pub fn split_log(self, ln_count: f64) -> Self {
        Self { log_inv: self.log_inv + ln_count.max(0.0) }
    }
}

/// `⌈2·ln(1/δ)⌉`, the step count and block count used by the benchmark.
pub fn two_log_steps(conf: Confidence) -> usize {
    ceil_count(2.0 * conf.log_inv()).max(1.0) as usize
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `parent`: `mix64(mix64(parent) ^ index)`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent) ^ index)
}

/// 64-bit FNV-1a over the UTF-8 bytes of `key`; stable across platforms and
/// releases, unlike `std::hash`.
pub fn stable_hash(key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
