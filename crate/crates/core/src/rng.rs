//! Replayable random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit master seed; the
//! ChaCha stream counter separates trials and purposes so that queries,
//! teacher noise and baseline selection never draw from the same sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stochastic component.
pub type RandomStream = ChaCha8Rng;

/// Identifier written next to seeds in output files.
pub const STREAM_ALGORITHM: &str = "chacha8/rand_chacha-0.3";

/// What a per-trial stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    TrueWeights = 0,
    Queries = 1,
    TeacherNoise = 2,
    Selection = 3,
}

const PURPOSES: u64 = 4;

/// Raw stream `stream` under master seed `seed`.
pub fn seeded(seed: u64, stream: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream owned by one trial for one purpose.
pub fn trial_stream(seed: u64, trial: u64, purpose: Purpose) -> RandomStream {
    seeded(seed, trial * PURPOSES + purpose as u64)
}
