//! Simulator for a public-coin simultaneous-message-passing (SMP) protocol
//! computing symmetric XOR functions `f(x, y) = D(|x ⊕ y|)`.
//!
//! Alice and Bob each hold an `n`-bit string and send one message to a
//! Referee; all three read a shared public coin. The crate provides
//!
//! - [`bits`]: packed bit vectors and Hamming arithmetic,
//! - [`predicate`]: the predicate `D` and its tail profile `(r0, r1, T)`,
//! - [`randomness`]: derivable public coins and random `k`-partitions,
//! - [`hamming`]: one-shot "distance at most `d`?" sketches (raw, bucket, BCH syndrome),
//! - [`protocol`]: the promise protocol `P_k`, the full protocol `P`, and transcripts,
//! - [`harness`]: Monte Carlo experiments and CSV output used by the CLI.

pub mod bits;
pub mod error;
pub mod hamming;
pub mod harness;
pub mod predicate;
pub mod protocol;
pub mod randomness;

pub use bits::{complement, hamming_distance, parity, sample_pair_with_distance, BitVector};
pub use error::{Error, Result};
pub use hamming::{HdDecision, HdMessage, HdParams, Strategy, Verdict};
pub use predicate::{Predicate, Profile};
pub use protocol::{Branch, Party, PkInstance, SmpProtocol, Transcript};
pub use randomness::{c_of_k, CoinSource, Partition};
