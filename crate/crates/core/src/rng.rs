//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator (a
//! counter-based 64-bit-seeded stream cipher RNG). Independent substreams
//! are selected with the ChaCha stream id, so results never depend on how
//! work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags occupying the top 16 bits of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Measurement = 1,
    Noise = 2,
    InitialPoint = 3,
    Optimizer = 4,
    Ansatz = 5,
    Evaluation = 6,
}

pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from (seed, index).
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
