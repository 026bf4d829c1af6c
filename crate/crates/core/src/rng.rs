//! Seed derivation for reproducible parallel Monte Carlo.
//!
//! Every sample gets its own generator keyed by `(seed, stream, index)`, so
//! results do not depend on how work is split across threads and two runs
//! that differ only in layout size still share draws for the common sites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags keep unrelated draws (broadcast users, unicast users,
/// quadrature draws, queue simulation) independent under one seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Users = 1,
    Broadcast = 2,
    Unicast = 3,
    Quadrature = 4,
    Queue = 5,
}

pub fn substream(seed: u64, stream: Stream, index: u64) -> SampleRng {
    let key = splitmix64(splitmix64(seed) ^ splitmix64(stream as u64).rotate_left(17) ^ index);
    ChaCha8Rng::seed_from_u64(splitmix64(key.wrapping_add(index)))
}
