//! Pinned random number generator.
//!
//! Everything in this workspace draws randomness from ChaCha12 keyed by a
//! 64-bit seed. ChaCha12 is seedable, portable (identical output on every
//! platform) and supports 2^64 independent streams per seed, which is how
//! parallel trials get reproducible, scheduling-independent randomness:
//! each `(seed, stream)` pair is its own generator.

use rand_chacha::rand_core::SeedableRng;

pub type StripRng = rand_chacha::ChaCha12Rng;

/// Generator for `seed`, stream 0.
pub fn from_seed(seed: u64) -> StripRng {
    StripRng::seed_from_u64(seed)
}

/// Independent child generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> StripRng {
    let mut rng = StripRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a1 = stream(42, 7);
        let mut a2 = stream(42, 7);
        let mut b = stream(42, 8);
        let x1: u64 = a1.next_u64();
        assert_eq!(x1, a2.next_u64());
        assert_ne!(x1, b.next_u64());
    }
}
