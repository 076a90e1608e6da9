//! Seeded randomness.
//!
//! Everything random in this crate is driven by xoshiro256** seeded through
//! SplitMix64 (`seed_from_u64`), so any stream is reproducible from a single
//! `u64` seed. Integer ranges are drawn with `Rng::gen_range`, which is
//! value-stable within the pinned `rand` 0.8 series.

pub use rand::Rng;
pub use rand_xoshiro::rand_core::SeedableRng;

/// The generator used throughout the crate.
pub type Seeded = rand_xoshiro::Xoshiro256StarStar;

/// Build the crate-wide generator from a bare seed.
pub fn from_seed(seed: u64) -> Seeded {
    Seeded::seed_from_u64(seed)
}

/// Derive a stream seed from a base seed and a stream index without
/// colliding for nearby bases (splitmix-style mixing).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
