//! Counter-derived random streams.
//!
//! Every random draw in a run comes from a stream keyed by
//! `(master_seed, purpose, generation, index)`. A stream depends only on its
//! key, never on what other streams have consumed, so evaluating individuals
//! on any number of threads (or in any order) yields bit-identical results.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// The generator behind every stream.
pub type Stream = Xoshiro256PlusPlus;

/// What a stream is used for. Distinct purposes never share a stream even when
/// the generation and index coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Building the initial population (index = individual).
    Init,
    /// Lifetime evaluation of one individual (index = individual).
    Evaluate,
    /// Selection, pairing, crossover and mutation for a whole generation.
    Reproduce,
    /// Free-standing sampling (Monte-Carlo oracles, CLI checks).
    Sample,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Init => 0x1,
            Purpose::Evaluate => 0x2,
            Purpose::Reproduce => 0x3,
            Purpose::Sample => 0x4,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the 64-bit key for a stream coordinate.
pub fn stream_key(master_seed: u64, purpose: Purpose, generation: u64, index: u64) -> u64 {
    let mut h = mix(master_seed);
    h = mix(h ^ purpose.tag());
    h = mix(h ^ generation);
    mix(h ^ index)
}

/// Open the stream at a coordinate.
pub fn stream(master_seed: u64, purpose: Purpose, generation: u64, index: u64) -> Stream {
    Stream::seed_from_u64(stream_key(master_seed, purpose, generation, index))
}
