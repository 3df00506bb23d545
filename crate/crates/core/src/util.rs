//! Small numeric and hashing utilities shared across modules.

/// Deterministic pairwise (binary-counter) summation.
///
/// The reduction tree depends only on the number of pushed values, never on
/// chunking or threading, so a fixed input sequence always produces the
/// bit-identical total.
#[derive(Debug, Default, Clone)]
pub struct PairwiseSum {
    // (level, partial); two partials at the same level merge immediately.
    stack: Vec<(u32, f64)>,
    count: u64,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let mut level = 0u32;
        let mut acc = x;
        while let Some(&(top_level, top)) = self.stack.last() {
            if top_level != level {
                break;
            }
            self.stack.pop();
            acc += top;
            level += 1;
        }
        self.stack.push((level, acc));
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Folds the remaining partials smallest-block first.
    pub fn total(&self) -> f64 {
        self.stack.iter().rev().map(|&(_, v)| v).sum()
    }
}

/// FNV-1a 64-bit hash, used for stable input digests in run manifests.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Greatest common divisor.
pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        let mut p = PairwiseSum::new();
        for &x in &xs {
            p.push(x);
        }
        assert!((p.total() - naive).abs() < 1e-10);
        assert_eq!(p.count(), 1000);
    }

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
