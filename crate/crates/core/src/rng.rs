//! Seeded random streams.
//!
//! Every stochastic component takes a caller-owned [`Stream`]. Independent
//! substreams for parallel shards are derived with [`substream`]: the base
//! seed fixes the ChaCha key and the substream id selects the ChaCha stream
//! word, so shard `i` draws the same numbers no matter which worker runs it.
//! Gaussian samples come from `rand_distr::StandardNormal` (ziggurat) on
//! top of this stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `id` under key `seed`.
pub fn substream(seed: u64, id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// SplitMix64 finalizer; derives a fresh key from a seed and a purpose tag.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
