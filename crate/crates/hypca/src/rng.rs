//! Counter-seeded pseudo-random streams.
//!
//! Every random quantity in the crate is drawn from a stream keyed by the
//! user seed plus a fixed salt path (e.g. `(seed, NOISE, pixel, band)`), so
//! the value depends only on the key and never on scheduling or worker
//! count. This is what makes generation reproducible bit-for-bit under any
//! parallel plan.

/// SplitMix64 finalizer. Good avalanche behaviour, trivially portable.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A small deterministic generator over the SplitMix64 sequence.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Derives an independent stream from `seed` and a salt path.
    pub fn new(seed: u64, salts: &[u64]) -> Self {
        let mut state = mix(seed);
        for &s in salts {
            state = mix(state ^ mix(s));
        }
        Stream { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix(self.state)
    }

    /// Uniform in the half-open interval [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open-closed interval (0, 1]; safe as a log argument.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Unit-mean exponential draw.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -self.next_f64_open().ln()
    }
}

/// Salt constants naming each consumer of randomness.
pub mod salt {
    pub const SIGNATURE: u64 = 0x5349_474e;
    pub const ENDMEMBER_CHOICE: u64 = 0x4348_4f4f;
    pub const ABUNDANCE: u64 = 0x4142_554e;
    pub const NOISE: u64 = 0x4e4f_4953;
}
