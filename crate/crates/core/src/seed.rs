//! Seeding for randomized checks.

use rand::rngs::StdRng;
use rand::SeedableRng;

/// Base seed when `STAB_SEED` is unset or unparsable.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Base seed from the `STAB_SEED` environment variable.
pub fn base_seed() -> u64 {
    std::env::var("STAB_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Deterministic generator for one named stream of trials.
pub fn rng_for(stream: &str) -> StdRng {
    // FNV-1a keeps stream seeds stable across Rust releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    StdRng::seed_from_u64(base_seed() ^ h)
}
