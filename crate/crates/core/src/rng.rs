//! Counter-based random streams.
//!
//! A stream is a ChaCha8 generator keyed by a 64-bit seed and positioned on
//! one of its 2^64 independent stream ids. Trial `t` of an experiment always
//! draws from `stream(seed, t)`, so results never depend on how trials are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Default seed used by bare invocations.
pub const DEFAULT_SEED: u64 = 0xDEC0DE;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed for a named sub-experiment (splitmix64 finaliser).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) mod tags {
    pub const TANGENT: u64 = 0x7A4E_0001;
    pub const MOMENTS: u64 = 0x7A4E_0002;
    pub const SIGNS: u64 = 0x7A4E_0003;
    pub const SECOND_SIDE: u64 = 0x7A4E_0004;
    pub const TAIL_RATIO: u64 = 0x7A4E_0005;
    pub const GAUSSIAN: u64 = 0x7A4E_0006;
    pub const THETA: u64 = 0x7A4E_0007;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 3).random();
        let c: u64 = stream(7, 4).random();
        let d: u64 = stream(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_ne!(derive_seed(1, tags::TANGENT), derive_seed(1, tags::MOMENTS));
        assert_eq!(derive_seed(1, 5), derive_seed(1, 5));
    }
}
