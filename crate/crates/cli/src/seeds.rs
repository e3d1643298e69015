//! Seed derivation: one independent RNG stream per (master seed,
//! optimizer, seed index) cell, stable across platforms and runs.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream seed for one run cell.
pub fn stream_seed(master: u64, optimizer: &str, seed_index: u64) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(optimizer.as_bytes()) ^ splitmix64(seed_index)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        let a = stream_seed(0, "icans", 0);
        assert_eq!(a, stream_seed(0, "icans", 0));
        assert_ne!(a, stream_seed(0, "icans", 1));
        assert_ne!(a, stream_seed(0, "gcans", 0));
        assert_ne!(a, stream_seed(1, "icans", 0));
    }
}
