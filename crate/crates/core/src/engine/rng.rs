//! Counter-based random streams.
//!
//! A stream is a key plus a counter; draw `i` is a pure function of the key
//! and `i`. Keys are derived from `(seed, agent, purpose)`, so every agent
//! owns private streams for each kind of decision and adding or removing an
//! agent never shifts another agent's draws.

use std::fmt;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive combination of two words into one well-mixed word.
pub fn combine(a: u64, b: u64) -> u64 {
    mix64(mix64(a ^ 0xD134_2543_DE82_EF95).wrapping_add(b).wrapping_mul(GOLDEN_GAMMA) ^ b)
}

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Disorient,
    Noise,
    Detect,
    Intervene,
    FalseGoal,
    Forget,
    Schedule,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Disorient => 1,
            Purpose::Noise => 2,
            Purpose::Detect => 3,
            Purpose::Intervene => 4,
            Purpose::FalseGoal => 5,
            Purpose::Forget => 6,
            Purpose::Schedule => 7,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stream({:016x}@{})", self.key, self.counter)
    }
}

/// The stream for one agent and purpose under `seed`.
pub fn derive_stream(seed: u64, agent_id: u64, purpose: Purpose) -> Stream {
    Stream::from_key(combine(combine(seed, agent_id), purpose.code()))
}

impl Stream {
    pub fn from_key(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Number of draws taken so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Bernoulli trial. `p <= 0` never succeeds and `p >= 1` always does.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Uniform integer in the inclusive range `lo..=hi`.
    pub fn between(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo) as u64 + 1) as i64
    }
}
