//! Deterministic seed derivation.
//!
//! All randomised code in this crate draws from [`rand_chacha::ChaCha20Rng`]
//! seeded through [`derive_seed`], so results are reproducible across
//! platforms and independent runs of the same configuration. Derived seeds
//! are position-based: extending a sweep with more trials or more `l` values
//! never changes the seeds of earlier cells.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Derives a child seed from a master seed and a call-site position.
///
/// Uses two rounds of the splitmix64 finaliser so that nearby `(master, tag)`
/// pairs produce uncorrelated child seeds.
pub fn derive_seed(master: u64, tag: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0x9e37_79b9_7f4a_7c15);
    for &t in tag {
        state = splitmix64(state ^ splitmix64(t));
    }
    state
}

/// A ChaCha20 generator seeded from a master seed and position tag.
pub fn rng_for(master: u64, tag: &[u64]) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(master, tag))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_deterministic() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
    }

    #[test]
    fn prefix_stability() {
        // Adding later positions must not disturb earlier ones.
        let a: Vec<u64> = (0..4).map(|t| derive_seed(3, &[0, t])).collect();
        let b: Vec<u64> = (0..8).map(|t| derive_seed(3, &[0, t])).collect();
        assert_eq!(a[..], b[..4]);
    }
}
