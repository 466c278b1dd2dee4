//! Keyed random streams.
//!
//! Every (seed, experiment, shot) triple gets its own ChaCha stream, so a
//! shot's outcome does not depend on how many shots ran before it or on
//! which thread ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ShotRng = ChaCha8Rng;

const DOMAIN: u64 = 0x7165_6d75_5f72_6e67;

pub fn shot_rng(seed: u64, experiment: usize, shot: u64) -> ShotRng {
    keyed(seed, experiment as u64, shot, 0)
}

/// A stream for a named purpose other than shot sampling (noise synthesis
/// uses its own so that readout noise never perturbs projective outcomes).
pub fn keyed(seed: u64, a: u64, b: u64, purpose: u64) -> ShotRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    key[24..].copy_from_slice(&(DOMAIN ^ purpose).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A seed for runs that did not request one.
pub fn fresh_seed() -> u64 {
    // keep seeds within JSON's exact integer range
    rand::random::<u64>() >> 11
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_keyed() {
        let a: u64 = shot_rng(1, 0, 5).random();
        let b: u64 = shot_rng(1, 0, 5).random();
        let c: u64 = shot_rng(1, 0, 6).random();
        let d: u64 = shot_rng(1, 1, 5).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(a, keyed(1, 0, 5, 1).random::<u64>());
    }

    #[test]
    fn fresh_seed_fits_f64() {
        for _ in 0..100 {
            assert!(fresh_seed() < (1u64 << 53));
        }
    }
}
