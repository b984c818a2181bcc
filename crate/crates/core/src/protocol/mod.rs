//! The promise protocol `P_k` and the full protocol `P`.
//!
//! Parties are pure functions of (own input, public coins); the referee sees
//! only the two message bundles and the coins. Coin labels, relative to the
//! coins handed in (one trial's source in the harness):
//!
//! ```text
//! partition                      P_k's shared k-partition
//! block/<i>/hd/<j>/rep/<m>       threshold-j sketch of block i
//! p/hd0, p/hd1                   P's distance tests on (x, y) and (x̄, y)
//! p/pk0/..., p/pk1/...           P's two P_k instances (same layout as above)
//! ```
//!
//! Transcript labels mirror the coin labels; the parity bits are `p/parity`.

mod transcript;

use std::collections::HashMap;
use std::fmt;

use crate::bits::{complement, parity, BitVector};
use crate::error::{Error, Result};
use crate::hamming::{exact_block_distance, hd_decide, hd_encode, HdMessage, HdParams, Strategy};
use crate::predicate::{compute_profile, tilde, Predicate, Profile};
use crate::randomness::{c_of_k, sample_partition, CoinSource};

pub use transcript::{Party, Transcript, TranscriptEntry, TranscriptHeader};

/// Sketch budget for the two distance tests of `P`.
pub const HD_EPSILON: f64 = 0.1;

/// `P_k`: computes `apply(|x ⊕ y|)` under the promise `|x ⊕ y| <= k`.
#[derive(Clone, Debug)]
pub struct PkInstance {
    k: usize,
    c: usize,
    epsilon: f64,
    apply: Predicate,
    params: Vec<HdParams>,
}

impl PkInstance {
    pub fn new(k: usize, apply: Predicate, strategy: Strategy) -> Result<Self> {
        let c = c_of_k(k);
        let epsilon = if k == 0 {
            HD_EPSILON
        } else {
            1.0 / (10.0 * k as f64 * log2_floor_one(c))
        };
        let params = if k == 0 {
            Vec::new()
        } else {
            (0..=c)
                .map(|j| HdParams::new(j, epsilon, strategy))
                .collect::<Result<_>>()?
        };
        Ok(PkInstance {
            k,
            c,
            epsilon,
            apply,
            params,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn apply(&self) -> &Predicate {
        &self.apply
    }

    /// Thresholds `HD(0, ε) .. HD(c, ε)` sent for every block.
    pub fn params(&self) -> &[HdParams] {
        &self.params
    }

    /// Union bound over every verdict the referee reads: `k · log2(c) · ε`,
    /// which is `1/10` by the choice of `ε` (zero for `k = 0`).
    pub fn error_budget(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            self.k as f64 * log2_floor_one(self.c) * self.epsilon
        }
    }

    /// One party's `k · (c + 1)` sketches.
    pub fn party_messages(&self, input: &BitVector, coins: &CoinSource) -> Result<PkBundle> {
        if self.k == 0 {
            return Ok(PkBundle { blocks: Vec::new() });
        }
        let partition = sample_partition(input.len(), self.k, &coins.derive("partition"))?;
        let blocks = partition
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, members)| {
                let part = input.restrict(members);
                let block_coins = coins.derive(&format!("block/{i}"));
                self.params
                    .iter()
                    .enumerate()
                    .map(|(j, p)| hd_encode(p, &part, &block_coins.derive(&format!("hd/{j}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(PkBundle { blocks })
    }

    /// `apply(min(Σ h_i, n))`, reading only the verdicts on each block's search path.
    pub fn referee(&self, a: &PkBundle, b: &PkBundle, coins: &CoinSource) -> Result<bool> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let mut total = 0usize;
        for (i, (ma, mb)) in a.blocks.iter().zip(&b.blocks).enumerate() {
            total += exact_block_distance(&self.params, ma, mb, &coins.derive(&format!("block/{i}")))?;
        }
        Ok(self.apply.eval_clamped(total))
    }

    fn check_shape(&self, bundle: &PkBundle) -> Result<()> {
        if bundle.blocks.len() != self.k || bundle.blocks.iter().any(|b| b.len() != self.params.len()) {
            return Err(Error::usage(format!(
                "P_{} bundle must hold {} blocks of {} messages",
                self.k,
                self.k,
                self.params.len()
            )));
        }
        Ok(())
    }

    fn bundle_from_lookup(&self, prefix: &str, lookup: &mut Lookup<'_>) -> Result<PkBundle> {
        let blocks = (0..self.k)
            .map(|i| {
                (0..self.params.len())
                    .map(|j| lookup.take(&format!("{prefix}/block/{i}/hd/{j}")).map(|payload| HdMessage { payload }))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(PkBundle { blocks })
    }
}

fn log2_floor_one(c: usize) -> f64 {
    (c as f64).log2().max(1.0)
}

/// One party's `P_k` messages, indexed `[block][threshold]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PkBundle {
    blocks: Vec<Vec<HdMessage>>,
}

impl PkBundle {
    pub fn blocks(&self) -> &[Vec<HdMessage>] {
        &self.blocks
    }

    pub fn message_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn cost_bits(&self) -> usize {
        self.blocks.iter().flatten().map(HdMessage::len).sum()
    }

    fn push_entries(&self, party: Party, prefix: &str, out: &mut Vec<TranscriptEntry>) {
        for (i, block) in self.blocks.iter().enumerate() {
            for (j, m) in block.iter().enumerate() {
                out.push(TranscriptEntry {
                    party,
                    label: format!("{prefix}/block/{i}/hd/{j}"),
                    payload: m.payload.clone(),
                });
            }
        }
    }

    /// Transcript entries under `prefix` (e.g. `"pk"` gives `pk/block/<i>/hd/<j>`).
    pub fn to_entries(&self, party: Party, prefix: &str) -> Vec<TranscriptEntry> {
        let mut out = Vec::new();
        self.push_entries(party, prefix, &mut out);
        out
    }
}

/// Which referee rule produced the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `HD(r0)` on `(x, y)` said "close": answer from `P_{r0}` with `D`.
    Low,
    /// `HD(r1)` on `(x̄, y)` said "close": answer from `P_{r1}` with `D̃`.
    High,
    /// Neither: answer `T(parity(x) ⊕ parity(y))`.
    Parity,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Low => "a",
            Branch::High => "b",
            Branch::Parity => "c",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefereeOutcome {
    pub output: bool,
    pub branch: Branch,
}

/// One party's complete message in `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyBundle {
    pub hd0: HdMessage,
    pub hd1: HdMessage,
    pub pk0: PkBundle,
    pub pk1: PkBundle,
    pub parity: bool,
}

impl PartyBundle {
    pub fn cost_bits(&self) -> usize {
        self.hd0.len() + self.hd1.len() + self.pk0.cost_bits() + self.pk1.cost_bits() + 1
    }

    /// Entries in the fixed order hd0, hd1, pk0, pk1, parity.
    pub fn to_entries(&self, party: Party) -> Vec<TranscriptEntry> {
        let mut out = Vec::with_capacity(3 + self.pk0.message_count() + self.pk1.message_count());
        let entry = |label: &str, payload: &BitVector| TranscriptEntry {
            party,
            label: label.to_string(),
            payload: payload.clone(),
        };
        out.push(entry("p/hd0", &self.hd0.payload));
        out.push(entry("p/hd1", &self.hd1.payload));
        self.pk0.push_entries(party, "p/pk0", &mut out);
        self.pk1.push_entries(party, "p/pk1", &mut out);
        out.push(entry("p/parity", &BitVector::from_bits([self.parity])));
        out
    }
}

struct Lookup<'a> {
    by_label: HashMap<&'a str, &'a BitVector>,
}

impl<'a> Lookup<'a> {
    fn new(entries: impl IntoIterator<Item = &'a TranscriptEntry>) -> Result<Self> {
        let mut by_label = HashMap::new();
        for e in entries {
            if by_label.insert(e.label.as_str(), &e.payload).is_some() {
                return Err(Error::usage(format!("duplicate transcript label {}", e.label)));
            }
        }
        Ok(Lookup { by_label })
    }

    fn take(&mut self, label: &str) -> Result<BitVector> {
        self.by_label
            .remove(label)
            .cloned()
            .ok_or_else(|| Error::usage(format!("transcript lacks {label}")))
    }

    fn finish(self) -> Result<()> {
        match self.by_label.keys().min() {
            Some(extra) => Err(Error::usage(format!("unexpected transcript label {extra}"))),
            None => Ok(()),
        }
    }
}

/// Both parties' bundles of one execution, plus the referee's decision.
#[derive(Clone, Debug)]
pub struct Execution {
    pub alice: PartyBundle,
    pub bob: PartyBundle,
    pub outcome: RefereeOutcome,
}

impl Execution {
    pub fn cost_bits(&self) -> usize {
        self.alice.cost_bits() + self.bob.cost_bits()
    }

    pub fn transcript(&self) -> Transcript {
        let mut entries = self.alice.to_entries(Party::Alice);
        entries.extend(self.bob.to_entries(Party::Bob));
        Transcript::from_entries(entries)
    }
}

/// The full protocol `P` for `f(x, y) = D(|x ⊕ y|)`.
#[derive(Clone, Debug)]
pub struct SmpProtocol {
    predicate: Predicate,
    profile: Profile,
    strategy: Strategy,
    hd0: HdParams,
    hd1: HdParams,
    pk0: PkInstance,
    pk1: PkInstance,
}

impl SmpProtocol {
    pub fn new(predicate: Predicate, strategy: Strategy) -> Result<Self> {
        let profile = compute_profile(&predicate);
        let hd0 = HdParams::new(profile.r0, HD_EPSILON, strategy)?;
        // |x̄ ⊕ y| = n - |x ⊕ y|, so "|x̄ ⊕ y| <= r1" is "|x ⊕ y| >= n - r1".
        let hd1 = HdParams::new(profile.r1, HD_EPSILON, strategy)?;
        let pk0 = PkInstance::new(profile.r0, predicate.clone(), strategy)?;
        let pk1 = PkInstance::new(profile.r1, tilde(&predicate), strategy)?;
        Ok(SmpProtocol {
            predicate,
            profile,
            strategy,
            hd0,
            hd1,
            pk0,
            pk1,
        })
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.predicate.n()
    }

    pub fn pk_low(&self) -> &PkInstance {
        &self.pk0
    }

    pub fn pk_high(&self) -> &PkInstance {
        &self.pk1
    }

    pub fn hd_low(&self) -> &HdParams {
        &self.hd0
    }

    pub fn hd_high(&self) -> &HdParams {
        &self.hd1
    }

    /// Alice works with `(x, x̄)`, Bob with `(y, y)`: the second copy feeds
    /// the high-weight tests, which run on the pair `(x̄, y)`.
    pub fn party_messages(&self, party: Party, input: &BitVector, coins: &CoinSource) -> Result<PartyBundle> {
        if input.len() != self.n() {
            return Err(Error::usage(format!(
                "input has {} bits, predicate expects {}",
                input.len(),
                self.n()
            )));
        }
        let flipped;
        let high_input = match party {
            Party::Alice => {
                flipped = complement(input);
                &flipped
            }
            Party::Bob => input,
        };
        Ok(PartyBundle {
            hd0: hd_encode(&self.hd0, input, &coins.derive("p/hd0"))?,
            hd1: hd_encode(&self.hd1, high_input, &coins.derive("p/hd1"))?,
            pk0: self.pk0.party_messages(input, &coins.derive("p/pk0"))?,
            pk1: self.pk1.party_messages(high_input, &coins.derive("p/pk1"))?,
            parity: parity(input),
        })
    }

    pub fn referee(&self, a: &PartyBundle, b: &PartyBundle, coins: &CoinSource) -> Result<RefereeOutcome> {
        if hd_decide(&self.hd0, &a.hd0, &b.hd0, &coins.derive("p/hd0"))?.verdict.is_le() {
            return Ok(RefereeOutcome {
                output: self.pk0.referee(&a.pk0, &b.pk0, &coins.derive("p/pk0"))?,
                branch: Branch::Low,
            });
        }
        if hd_decide(&self.hd1, &a.hd1, &b.hd1, &coins.derive("p/hd1"))?.verdict.is_le() {
            return Ok(RefereeOutcome {
                output: self.pk1.referee(&a.pk1, &b.pk1, &coins.derive("p/pk1"))?,
                branch: Branch::High,
            });
        }
        Ok(RefereeOutcome {
            output: self.profile.t(a.parity ^ b.parity),
            branch: Branch::Parity,
        })
    }

    pub fn run(&self, x: &BitVector, y: &BitVector, coins: &CoinSource) -> Result<Execution> {
        let alice = self.party_messages(Party::Alice, x, coins)?;
        let bob = self.party_messages(Party::Bob, y, coins)?;
        let outcome = self.referee(&alice, &bob, coins)?;
        Ok(Execution { alice, bob, outcome })
    }

    /// Rebuilds one party's bundle from its transcript entries.
    pub fn bundle_from_entries<'a>(
        &self,
        entries: impl IntoIterator<Item = &'a TranscriptEntry>,
    ) -> Result<PartyBundle> {
        let mut lookup = Lookup::new(entries)?;
        let hd0 = HdMessage {
            payload: lookup.take("p/hd0")?,
        };
        let hd1 = HdMessage {
            payload: lookup.take("p/hd1")?,
        };
        let pk0 = self.pk0.bundle_from_lookup("p/pk0", &mut lookup)?;
        let pk1 = self.pk1.bundle_from_lookup("p/pk1", &mut lookup)?;
        let bit = lookup.take("p/parity")?;
        if bit.len() != 1 {
            return Err(Error::usage("parity entry must be one bit"));
        }
        lookup.finish()?;
        Ok(PartyBundle {
            hd0,
            hd1,
            pk0,
            pk1,
            parity: bit.get(0),
        })
    }

    /// Referee decision recomputed from a transcript alone.
    pub fn replay(&self, transcript: &Transcript, coins: &CoinSource) -> Result<RefereeOutcome> {
        let a = self.bundle_from_entries(transcript.party_entries(Party::Alice))?;
        let b = self.bundle_from_entries(transcript.party_entries(Party::Bob))?;
        self.referee(&a, &b, coins)
    }
}
