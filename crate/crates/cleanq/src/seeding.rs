//! Deterministic seed derivation.
//!
//! Every sampling operation in the crate takes an explicit seed. Trial
//! ensembles derive one sub-seed per trial from a base seed, a stream tag,
//! and the trial index, so batches may run in parallel while remaining
//! bit-reproducible.

/// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for trial `index` of stream `stream` under `seed`.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    mix(mix(seed ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93)) ^ index)
}

/// Splitting rule for parallel shot batches: `seed XOR batch_index`.
pub fn batch_seed(seed: u64, batch: u64) -> u64 {
    seed ^ batch
}
