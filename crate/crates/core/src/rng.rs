//! Counter-based random streams.
//!
//! Every draw is a pure function of `(key, counter)`: the `n`-th 64-bit word
//! of a stream is the SplitMix64 output function applied to
//! `key + n * 0x9E3779B97F4A7C15` (wrapping), for `n = 1, 2, ...`. Keys are
//! derived from a root seed and a path of integer tags, so independent
//! streams (per run, per group, per fold) never depend on scheduling order.
//!
//! Derived quantities:
//! - uniform `f64` in `[0, 1)`: top 53 bits of a word times `2^-53`;
//! - standard normal: Box-Muller, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)` from
//!   two consecutive uniforms (the sine branch is discarded);
//! - integer below `n`: rejection of words `>= 2^64 - (2^64 mod n)`, then `word mod n`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a stream key from a seed and a path of tags.
pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |key, &tag| {
        mix64(key ^ mix64(tag.wrapping_add(GOLDEN)))
    })
}

#[derive(Clone, Debug)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, path: &[u64]) -> Self {
        Self {
            key: derive_key(seed, path),
            counter: 0,
        }
    }

    /// Child stream; does not advance `self`.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(tag.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let w = self.next_u64();
            if w <= zone {
                return w % n;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
