use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent 64-bit seed for a named purpose from a base seed.
///
/// SplitMix64 finalizer over `seed ^ tag`-mixed input; distinct tags give
/// decorrelated streams, and the mapping is stable across platforms.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 is used everywhere a seed must reproduce bit-identical output
/// across platforms and dependency upgrades.
pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) mod tags {
    pub const ID_VECTORS: u64 = 1;
    pub const VALUE_VECTORS: u64 = 2;
    pub const ENCODE_TIEBREAK: u64 = 3;
    pub const MODEL_TIEBREAK: u64 = 4;
}
