//! Stable 64-bit hashing for seeds and shard assignment.
//!
//! * `stable_hash(s)` is 64-bit FNV-1a over the UTF-8 bytes of `s`.
//! * `page_seed(global, id)` is the SplitMix64 finalizer applied to `global ^ stable_hash(id)`.
//! * `shard_for(id, n)` is `stable_hash(id) % n`.
//!
//! These definitions are part of the output format: changing them changes every corpus.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn page_seed(global_seed: u64, id: &str) -> u64 {
    splitmix64(global_seed ^ stable_hash(id))
}

pub fn shard_for(id: &str, shards: usize) -> usize {
    (stable_hash(id) % shards.max(1) as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stable_hash(""), 0xcbf29ce484222325);
        assert_eq!(stable_hash("a"), 0xaf63dc4c8601ec8c);
        assert_eq!(stable_hash("foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn splitmix_reference_value() {
        // First output of SplitMix64 seeded with 0.
        assert_eq!(splitmix64(0), 0xe220a8397b1dcdaf);
    }

    #[test]
    fn seeds_differ_per_page() {
        assert_ne!(page_seed(1, "a"), page_seed(1, "b"));
        assert_ne!(page_seed(1, "a"), page_seed(2, "a"));
        assert!(shard_for("anything", 4) < 4);
    }
}
