//! Keyed random streams.
//!
//! Every random draw in the toolkit comes from a ChaCha8 stream whose
//! 256-bit key is `(seed, domain, a, b)`. A stream is a pure function of
//! its key, so a dropout mask for example `i` at step `s` is the same no
//! matter which thread computes it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand::Rng;

/// Stream domains. Distinct domains never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Init = 1,
    Shuffle = 2,
    Dropout = 3,
    Split = 4,
    Embedding = 5,
    Fixture = 6,
    GradCheck = 7,
    Probe = 8,
}

pub fn stream(seed: u64, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Fisher-Yates shuffle driven by `rng`.
pub fn shuffle<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(mut r: ChaCha8Rng) -> Vec<u32> {
        (0..4).map(|_| r.gen()).collect()
    }

    #[test]
    fn streams_are_keyed() {
        assert_eq!(draws(stream(7, Domain::Dropout, 1, 2)), draws(stream(7, Domain::Dropout, 1, 2)));
        assert_ne!(draws(stream(7, Domain::Dropout, 1, 2)), draws(stream(7, Domain::Dropout, 1, 3)));
        assert_ne!(draws(stream(7, Domain::Dropout, 1, 2)), draws(stream(7, Domain::Shuffle, 1, 2)));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<u32> = (0..50).collect();
        shuffle(&mut v, &mut stream(1, Domain::Shuffle, 0, 0));
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
