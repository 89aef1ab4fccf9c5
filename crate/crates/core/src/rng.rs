//! Seeded random streams.
//!
//! Every random draw comes from ChaCha20 (`rand_chacha` 0.3) keyed by
//! `seed_from_u64(seed)`. Independent consumers use disjoint stream ids:
//!
//! | stream            | consumer                                    |
//! |-------------------|---------------------------------------------|
//! | `0`               | dyadic rounding and phase, golden phase bits |
//! | `1 + r`           | matching offsets of retry `r`               |
//! | `2^32 + s`        | sample `s` of a sampled mixture             |
//! | `2^33 + j`        | simulation shard `j`                        |
//!
//! Reimplementations that follow the same rule reproduce the structure of
//! every run, though not necessarily the bit streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name and version of the generator, recorded in artifacts.
pub const GENERATOR: &str = "chacha20-rand_chacha-0.3";

pub const PRIMARY_STREAM: u64 = 0;
const SAMPLE_BASE: u64 = 1 << 32;
const SHARD_BASE: u64 = 1 << 33;

pub type StreamRng = ChaCha20Rng;

pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn primary(seed: u64) -> StreamRng {
    stream(seed, PRIMARY_STREAM)
}

pub fn matching_retry(seed: u64, retry: u32) -> StreamRng {
    stream(seed, 1 + retry as u64)
}

pub fn sample(seed: u64, index: u32) -> StreamRng {
    stream(seed, SAMPLE_BASE + index as u64)
}

pub fn shard(seed: u64, index: u32) -> StreamRng {
    stream(seed, SHARD_BASE + index as u64)
}
