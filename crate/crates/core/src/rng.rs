//! Seeded, stream-splittable random number generation.
//!
//! All stochastic engines draw from ChaCha8 with a 64-bit seed and a 64-bit
//! stream id, so independent chains and replicas are reproducible from
//! `(seed, stream)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Algorithm identifier recorded in run manifests.
pub const ALGORITHM: &str = "chacha8(seed_from_u64, stream)";

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
