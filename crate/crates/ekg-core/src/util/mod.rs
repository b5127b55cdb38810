//! Small shared utilities: checksums and a stable string hash.

mod crc32c;

pub use crc32c::{crc32c, Crc32c};

/// FNV-1a 64-bit hash.
///
/// Used wherever a string must map to a stable seed (token embeddings in the
/// harness, deterministic tie-breaking). `std::collections::hash_map`'s
/// default hasher is randomized per process and unsuitable for anything
/// persisted or replayed.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv1a64_known_vectors() {
        // Reference values from the FNV specification.
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
