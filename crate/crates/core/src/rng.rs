//! Seed derivation for reproducible Monte-Carlo streams.
//!
//! Every random stream in a run is a ChaCha8 generator seeded from a 64-bit
//! value obtained by folding indices into the master seed with the SplitMix64
//! finaliser:
//!
//! ```text
//! mix64(z)      = splitmix64 finaliser of z + 0x9E3779B97F4A7C15
//! derive(s, i)  = mix64(s ^ mix64(i))
//! substream(m, sweep, trial) = derive(derive(mix64(m), sweep), trial)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds one index into a seed.
pub fn derive(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

/// Seed of the stream owned by one (sweep point, trial) pair.
pub fn substream_seed(master_seed: u64, sweep_index: u64, trial_index: u64) -> u64 {
    derive(derive(mix64(master_seed), sweep_index), trial_index)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named purposes, so that e.g. user drops do not depend on how many
/// channel coefficients an IRS layout consumes.
pub mod purpose {
    pub const PLACEMENT: u64 = 1;
    pub const CHANNELS: u64 = 2;
    pub const INIT: u64 = 3;
    pub const CSI_SAMPLES: u64 = 4;
    pub const PHASE_ERROR: u64 = 5;
    pub const SELECTION: u64 = 6;
}
