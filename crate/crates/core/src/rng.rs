//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha20 stream keyed by a 64-bit seed and
//! selected by a `(purpose, index)` pair, so results do not depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier recorded next to every Monte Carlo output.
pub const RNG_ID: &str = "chacha20-rand_chacha0.9-splitmix64";

/// What a stream is used for; distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Coupling = 1,
    Haar = 2,
    Annealed = 3,
    SampleSeed = 4,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha20Rng {
    let key = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha20Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Seed of the `index`-th sample of a run keyed by `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(Purpose::SampleSeed as u64)).wrapping_add(index))
}
