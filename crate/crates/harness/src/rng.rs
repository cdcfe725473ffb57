//! All harness randomness flows from one user-supplied seed through named
//! substreams, so regenerating any piece of an experiment never perturbs
//! the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream carrying the model draw: basis, codes, noise.
pub const STREAM_DATA: u64 = 1;
/// Substream carrying the per-entry observation masks.
pub const STREAM_MISSINGNESS: u64 = 2;
/// Substream from which trainer-internal seeds are derived.
pub const STREAM_INIT: u64 = 3;
/// Substream for random index choices (sparse support selection).
pub const STREAM_SHUFFLING: u64 = 4;

/// A generator pinned to one named substream of a seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 mixing step; used to derive independent cell seeds.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one experiment replicate, derived from the master seed.
pub fn replicate_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(master ^ splitmix64(replicate.wrapping_add(1)))
}

/// Trainer seed paired with a replicate's data seed.
pub fn trainer_seed(data_seed: u64) -> u64 {
    splitmix64(data_seed.wrapping_add(STREAM_INIT))
}
