//! Reproducible random streams.
//!
//! Every realization owns a stream keyed by `(seed, index, lane)`. The
//! generator is SplitMix64 in counter mode: the `k`-th output of a stream is
//! `mix(key + (k + 1) * GAMMA)`, so any position can be evaluated directly.
//! That is what lets lazily explored clusters share per-edge uniforms across
//! parameter values (common random numbers).

use rand_core::{impls, RngCore};

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Identifier recorded in run metadata.
pub const GENERATOR_NAME: &str = "splitmix64-counter/v1";

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key for realization `index` on sub-stream `lane`.
pub fn stream_key(seed: u64, index: u64, lane: u64) -> u64 {
    let k = mix64(seed ^ 0x6a09_e667_f3bc_c909);
    let k = mix64(k ^ index.wrapping_mul(GAMMA));
    mix64(k ^ lane.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(1))
}

/// Output at `position` of the stream with `key`.
#[inline]
pub fn at(key: u64, position: u64) -> u64 {
    mix64(key.wrapping_add(position.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn unit_at(key: u64, position: u64) -> f64 {
    to_unit(at(key, position))
}

/// Sequential view over a counter stream.
#[derive(Clone, Debug)]
pub struct Stream {
    key: u64,
    position: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { key, position: 0 }
    }

    pub fn for_realization(seed: u64, index: u64, lane: u64) -> Self {
        Self::new(stream_key(seed, index, lane))
    }

    pub fn unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let out = at(self.key, self.position);
        self.position += 1;
        out
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
