//! Counter-addressed randomness.
//!
//! Every draw is located by `(seed, t, label, counter)`. The first three
//! words key a ChaCha8 generator and the counter selects its stream, so the
//! deviates at an address never depend on what else has been drawn.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Label {
    /// The single layered uniform of each chain update.
    Layered = 0,
    /// Rejection sampling attempts.
    Rejection = 1,
    /// Marking construction.
    Marking = 2,
    /// Randomized tree construction.
    Tensor = 3,
}

/// Time index reserved for the final extension to unmarked variables.
pub const FINAL_TIME: i64 = i64::MAX;
/// Time index reserved for auxiliary draws made by verification code.
pub const AUX_TIME: i64 = i64::MIN;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th sample (or trial) drawn under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN).wrapping_add(index.wrapping_mul(GOLDEN)) ^ 0xD1B5_4A32_D192_ED03)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tape {
    seed: u64,
}

impl Tape {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, t: i64, label: Label, counter: u64) -> TapeStream {
        let h = mix64(mix64(mix64(self.seed.wrapping_add(GOLDEN)) ^ t as u64) ^ (label as u64));
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            let w = mix64(h.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(counter);
        TapeStream { rng }
    }

    /// First deviate of the stream at the given address.
    pub fn draw_uniform(&self, t: i64, label: Label, counter: u64) -> f64 {
        self.stream(t, label, counter).next_f64()
    }
}

/// Sequential deviates from one tape address.
#[derive(Clone, Debug)]
pub struct TapeStream {
    rng: ChaCha8Rng,
}

impl TapeStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`, unbiased.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index drawn from `pmf` by inverse CDF.
    pub fn pick(&mut self, pmf: &[f64]) -> usize {
        pick_index(pmf, self.next_f64())
    }

    /// Fisher–Yates shuffle of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<u32> {
        let mut p: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}

/// Locate `u` in the partition of [0,1) into consecutive blocks of `pmf`.
/// Rounding overflow past the last block lands on the last positive entry.
pub fn pick_index(pmf: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(pmf.len() - 1)
}
