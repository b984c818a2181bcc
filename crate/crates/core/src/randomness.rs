//! Public coins.
//!
//! Every party regenerates the same randomness from a master seed and a
//! slash-separated derivation path, so no coin bits ever travel in a message.
//! Labels used by the protocols:
//!
//! ```text
//! trial/<t>/pk/<side>/partition
//! trial/<t>/pk/<side>/block/<i>/hd/<j>/rep/<m>
//! trial/<t>/p/<branch>/...        branch in {hd0, hd1, pk0, pk1}
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DOMAIN: &[u8] = b"smpxor/coin-source/v1";

/// A deterministic stream of shared random bits.
///
/// Two sources with the same master seed and path produce identical
/// streams. `derive(s, "a/b")` is the same source as `derive(derive(s, "a"), "b")`.
#[derive(Clone, PartialEq, Eq)]
pub struct CoinSource {
    seed: u64,
    path: String,
    key: [u8; 32],
}

impl CoinSource {
    pub fn new(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(seed.to_le_bytes());
        CoinSource {
            seed,
            path: String::new(),
            key: h.finalize().into(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The derivation path from the master seed, `""` at the root.
    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn derive(&self, label: &str) -> CoinSource {
        let mut key = self.key;
        for segment in label.split('/') {
            let mut h = Sha256::new();
            h.update(key);
            h.update((segment.len() as u64).to_le_bytes());
            h.update(segment.as_bytes());
            key = h.finalize().into();
        }
        let path = if self.path.is_empty() {
            label.to_string()
        } else {
            format!("{}/{}", self.path, label)
        };
        CoinSource {
            seed: self.seed,
            path,
            key,
        }
    }

    /// A fresh generator positioned at the start of this source's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}

impl std::fmt::Debug for CoinSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CoinSource({:#x}:{})", self.seed, self.path)
    }
}

/// A random map `[n] -> [k]`; block `B(j)` is the preimage of `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    block_of: Vec<u32>,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_of(&self) -> &[u32] {
        &self.block_of
    }

    /// Member positions of each block, in increasing order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &b) in self.block_of.iter().enumerate() {
            blocks[b as usize].push(i);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in &self.block_of {
            sizes[b as usize] += 1;
        }
        sizes
    }
}

/// Assigns each of `n` positions independently and uniformly to one of `k` blocks.
pub fn sample_partition(n: usize, k: usize, coins: &CoinSource) -> Result<Partition> {
    if k == 0 {
        return Err(Error::usage("partition needs at least one block"));
    }
    let k32 = u32::try_from(k).map_err(|_| Error::usage("too many blocks"))?;
    let mut rng = coins.rng();
    let block_of = (0..n).map(|_| rng.random_range(0..k32)).collect();
    Ok(Partition { k, block_of })
}

/// Per-block cap on differing positions: `ceil(4 log2 k / log2 log2 k)`, at most `k`.
///
/// For `k < 4` the double logarithm is not positive and `c = k`.
pub fn c_of_k(k: usize) -> usize {
    if k < 4 {
        return k;
    }
    let lg = (k as f64).log2();
    let c = (4.0 * lg / lg.log2()).ceil() as usize;
    c.min(k)
}

/// Union bound `(e/c)^c * k` on the probability that a random `k`-partition of
/// a weight-`k` string puts `c_of_k(k)` or more ones into one block.
pub fn partition_failure_bound(k: usize) -> f64 {
    let c = c_of_k(k) as f64;
    (std::f64::consts::E / c).powf(c) * k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_path_same_stream() {
        let a = CoinSource::new(7).derive("trial/3/pk/main/partition");
        let b = CoinSource::new(7).derive("trial/3/pk/main/partition");
        let (mut ra, mut rb) = (a.rng(), b.rng());
        for _ in 0..(1_000_000 / 64) {
            assert_eq!(ra.next_u64(), rb.next_u64());
        }
    }

    #[test]
    fn segmentwise_derivation_matches_joined_label() {
        let root = CoinSource::new(99);
        let joined = root.derive("trial/0/p/hd0");
        let stepped = root.derive("trial").derive("0").derive("p/hd0");
        assert_eq!(joined, stepped);
        assert_eq!(joined.path(), "trial/0/p/hd0");
    }

    #[test]
    fn sibling_labels_diverge() {
        let s = CoinSource::new(1);
        let mut a = s.derive("block/3").rng();
        let mut b = s.derive("block/4").rng();
        let xa = (a.next_u64(), a.next_u64());
        let xb = (b.next_u64(), b.next_u64());
        assert_ne!(xa, xb);
        assert_ne!(CoinSource::new(1).rng().next_u64(), CoinSource::new(2).rng().next_u64());
    }

    #[test]
    fn single_block_partition() {
        let p = sample_partition(4, 1, &CoinSource::new(0)).unwrap();
        assert_eq!(p.block_of(), &[0, 0, 0, 0]);
        assert!(sample_partition(4, 0, &CoinSource::new(0)).is_err());
    }

    #[test]
    fn partition_block_sizes_concentrate() {
        let (n, k) = (100_000usize, 10usize);
        let p = sample_partition(n, k, &CoinSource::new(5)).unwrap();
        let mean = n as f64 / k as f64;
        let sd = (n as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
        for size in p.block_sizes() {
            assert!((size as f64 - mean).abs() <= 5.0 * sd, "{size}");
        }
        let blocks = p.blocks();
        assert_eq!(blocks.iter().map(Vec::len).sum::<usize>(), n);
    }

    #[test]
    fn partition_occupancy_is_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let (n, k) = (10_000usize, 16usize);
        let p = sample_partition(n, k, &CoinSource::new(6).derive("partition")).unwrap();
        let expected = n as f64 / k as f64;
        let stat: f64 = p
            .block_sizes()
            .iter()
            .map(|&s| (s as f64 - expected).powi(2) / expected)
            .sum();
        let critical = ChiSquared::new((k - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(stat < critical, "chi2 = {stat}, critical = {critical}");
    }

    #[test]
    fn c_values() {
        assert_eq!(c_of_k(1), 1);
        assert_eq!(c_of_k(2), 2);
        assert_eq!(c_of_k(3), 3);
        assert_eq!(c_of_k(4), 4);
        assert_eq!(c_of_k(16), 8);
        assert_eq!(c_of_k(256), 11);
        for k in 1..2000 {
            assert!(c_of_k(k) <= k);
        }
    }

    #[test]
    fn lemma_bound_values() {
        // (e/8)^8 * 16 and (e/10)^10 * 64
        assert!((partition_failure_bound(16) - 2.86e-3).abs() < 0.05e-3);
        assert!((partition_failure_bound(64) - 1.4e-4).abs() < 0.05e-4);
    }
}
