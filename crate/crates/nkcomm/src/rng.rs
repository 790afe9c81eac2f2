//! Deterministic pseudo-random primitives: the splitmix64 finalizer and a
//! counter-based stream built on it. All seeded state in the crate flows
//! through these two functions, so any value is reproducible from (seed, key).

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer. Pure; wrapping 64-bit arithmetic.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top 53 bits mapped to [0, 1).
pub fn unit_from_bits(z: u64) -> f64 {
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Sequential stream: the c-th output is mix64(seed + c * GOLDEN_GAMMA).
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.state);
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        out
    }

    pub fn next_unit(&mut self) -> f64 {
        unit_from_bits(self.next_u64())
    }

    /// Uniform draw in [0, bound). Modulo reduction; bias is below 2^-32
    /// for the small bounds used here (shuffles, subset draws).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below: bound must be positive");
        self.next_u64() % bound
    }

    /// Partial Fisher-Yates: shuffles the first `take` slots of `items`.
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], take: usize) {
        let len = items.len();
        let take = take.min(len.saturating_sub(1));
        for t in 0..take {
            let r = t + self.below((len - t) as u64) as usize;
            items.swap(t, r);
        }
    }
}
