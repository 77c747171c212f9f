//! Fixed Zobrist keys for positional hashing.
//!
//! Keys are generated at compile time from a SplitMix64 stream so every build
//! (and every thread) hashes positions identically.

use crate::go::MAX_POINTS;

const fn splitmix64(state: u64) -> (u64, u64) {
    let next = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (next, z ^ (z >> 31))
}

const fn build_keys() -> [[u64; MAX_POINTS]; 2] {
    let mut keys = [[0u64; MAX_POINTS]; 2];
    let mut state = 0x5EED_0F60_B0A2_D000u64;
    let mut color = 0;
    while color < 2 {
        let mut i = 0;
        while i < MAX_POINTS {
            let (next, value) = splitmix64(state);
            state = next;
            keys[color][i] = value;
            i += 1;
        }
        color += 1;
    }
    keys
}

static KEYS: [[u64; MAX_POINTS]; 2] = build_keys();

/// Key for a stone of color index `color` (0 = black, 1 = white) on point `index`.
#[inline]
pub(crate) fn stone_key(color: usize, index: usize) -> u64 {
    KEYS[color][index]
}

/// Stateless 64-bit mixer, used to derive independent seeds from a base seed.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ salt.wrapping_mul(0xD6E8_FEB8_6659_FD93)).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_distinct() {
        let mut all: alloc::vec::Vec<u64> = KEYS.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 2 * MAX_POINTS);
        assert!(!all.contains(&0));
    }
}
