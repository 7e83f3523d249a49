//! Seeded pseudorandom generator used for weight initialization.
//!
//! The generator is SplitMix64, chosen because it is tiny, fast, and
//! trivially portable: a cross-language port needs the three lines of
//! `next_u64` below and nothing else. Identical seeds produce identical
//! weight tensors on every platform.
//!
//! Exact definition, so a port can be written from this comment alone:
//!
//! ```text
//! state <- state + 0x9E3779B97F4A7C15                 (wrapping, mod 2^64)
//! z <- state
//! z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9         (wrapping)
//! z <- (z XOR (z >> 27)) * 0x94D049BB133111EB         (wrapping)
//! return z XOR (z >> 31)
//! ```
//!
//! Floating-point draws take the top 53 bits: `(u >> 11) * 2^-53`,
//! giving a double in `[0, 1)`. `uniform(lo, hi)` is `lo + f * (hi - lo)`.

/// SplitMix64 stream. The struct is deliberately `Copy`-free so a stream
/// cannot be forked by accident; clone explicitly if a fork is intended.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` from the top 53 bits of one `next_u64`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Uniform integer in `[0, n)` by modulo reduction. The bias is below
    /// 2^-32 for any `n` this crate uses (vocabulary sizes, token counts),
    /// which is irrelevant here and keeps the generator portable.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is meaningless");
        self.next_u64() % n
    }
}
