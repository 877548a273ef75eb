//! Deterministic per-task random streams.
//!
//! Stream `i` of master seed `s` is a ChaCha8 generator keyed by `s` with stream
//! counter `i`, so any task can reconstruct its own generator without
//! coordination and parallel execution order never changes the draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Generator for stream `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }

    /// Generator for a stream addressed by a tuple of task coordinates.
    pub fn stream_for(&self, key: &[u64]) -> ChaCha8Rng {
        self.stream(stream_id(key))
    }
}

/// Mixes a tuple of task coordinates into a single stream index.
pub fn stream_id(key: &[u64]) -> u64 {
    let mut h: u64 = 0x243f_6a88_85a3_08d3;
    for &k in key {
        h = splitmix64(h ^ splitmix64(k));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
