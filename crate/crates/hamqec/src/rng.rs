//! Counter-style reproducible random streams for parallel Monte Carlo.
//!
//! Every stochastic site in a QEC shot (one circuit location, one shot) gets
//! its own generator derived from `(master seed, shot, layer, location)`.
//! Streams are therefore independent of execution order and of each other,
//! which gives bit-identical results under any thread count and maximal
//! common-random-number coupling between runs that differ in one noise
//! parameter.

/// SplitMix64: tiny, fast, and statistically fine for Monte Carlo sampling.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        // 53 mantissa bits.
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n).
    #[inline]
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Rejection-free via 128-bit multiply; bias is < 2^-64, irrelevant here.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

/// Mix distinct stream coordinates into one 64-bit seed.
#[inline]
pub fn stream_seed(master: u64, a: u64, b: u64, c: u64) -> u64 {
    // One SplitMix64 scramble per coordinate keeps distinct tuples apart.
    let mut s = SplitMix64::new(master ^ 0xA076_1D64_78BD_642F);
    let x = s.next_u64() ^ a.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let mut s = SplitMix64::new(x);
    let y = s.next_u64() ^ b.wrapping_mul(0x8EBC_6AF0_9C88_C6E3);
    let mut s = SplitMix64::new(y);
    s.next_u64() ^ c.wrapping_mul(0x5895_58CB_3423_A05B)
}

/// Generator for one `(shot, layer, location)` site.
#[inline]
pub fn location_rng(master: u64, shot: u64, layer: u64, location: u64) -> SplitMix64 {
    SplitMix64::new(stream_seed(master, shot, layer, location))
}
