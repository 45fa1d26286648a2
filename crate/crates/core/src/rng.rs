//! Seeded counter-based random streams.
//!
//! Every stochastic routine derives its generator from `(seed, stream)` so
//! results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a two-level key such as `(epoch, sample)`; distinct while
/// both parts stay below 2^32.
pub fn stream_id(hi: u64, lo: u64) -> u64 {
    (hi << 32) | (lo & 0xFFFF_FFFF)
}
