//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 seeded with
//! `seed_from_u64(seed)` and then moved to a numbered stream with
//! `set_stream`. Two streams from the same seed never overlap, so each
//! consumer (per-class shuffles, initializers, fold plans) is a pure
//! function of `(seed, stream)`.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub type Rng = ChaCha8Rng;

/// Stream indices reserved for each consumer.
pub mod streams {
    pub const SPLIT_POSITIVE: u64 = 1;
    pub const SPLIT_NEGATIVE: u64 = 2;
    pub const FOLD_POSITIVE: u64 = 3;
    pub const FOLD_NEGATIVE: u64 = 4;
    pub const SYNTH: u64 = 5;
    pub const INIT_MLP: u64 = 6;
    pub const EM: u64 = 7;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
