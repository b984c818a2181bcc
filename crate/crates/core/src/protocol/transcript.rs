use std::fmt;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(Party::Alice),
            "bob" => Ok(Party::Bob),
            other => Err(Error::usage(format!("unknown party {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub party: Party,
    pub label: String,
    pub payload: BitVector,
}

/// Everything Alice and Bob sent, in deterministic label order. The referee
/// sends nothing and the public coin is free, so the cost is the total
/// payload length.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<TranscriptEntry>) -> Self {
        Transcript { entries }
    }

    pub fn push(&mut self, party: Party, label: impl Into<String>, payload: BitVector) {
        self.entries.push(TranscriptEntry {
            party,
            label: label.into(),
            payload,
        });
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = TranscriptEntry>) {
        self.entries.extend(entries);
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn party_entries(&self, party: Party) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(move |e| e.party == party)
    }

    pub fn cost_bits(&self) -> usize {
        self.entries.iter().map(|e| e.payload.len()).sum()
    }

    pub fn party_cost_bits(&self, party: Party) -> usize {
        self.party_entries(party).map(|e| e.payload.len()).sum()
    }

    /// `header` line followed by `party<TAB>label<TAB>hex<TAB>bitlen` per entry.
    pub fn dump(&self, header: &TranscriptHeader) -> String {
        let mut out = header.to_string();
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.party,
                e.label,
                e.payload.to_hex(),
                e.payload.len()
            ));
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<(TranscriptHeader, Transcript)> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::parse(1, "empty transcript dump"))?;
        let header = TranscriptHeader::parse(first).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut transcript = Transcript::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [party, label, hex, bitlen] = fields[..] else {
                return Err(Error::parse(lineno, format!("expected 4 tab-separated fields, got {}", fields.len())));
            };
            let party = party.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            let len: usize = bitlen
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad bit length {bitlen:?}")))?;
            let payload = BitVector::from_hex(hex, len).map_err(|e| Error::parse(lineno, e.to_string()))?;
            transcript.push(party, label, payload);
        }
        Ok((header, transcript))
    }
}

/// First line of a transcript dump: enough to rebuild the protocol and coins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptHeader {
    pub seed: u64,
    pub n: usize,
    pub predicate: String,
    pub strategy: String,
    pub trial: u64,
    pub weight: usize,
    /// `D(0..=n)` as a 0/1 string.
    pub values: String,
}

impl fmt::Display for TranscriptHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#seed={}\tn={}\tpredicate={}\tstrategy={}\ttrial={}\tweight={}\tvalues={}",
            self.seed, self.n, self.predicate, self.strategy, self.trial, self.weight, self.values
        )
    }
}

impl TranscriptHeader {
    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::usage("transcript header must start with '#'"))?;
        let get = {
            let fields: Vec<(&str, &str)> = body.split('\t').filter_map(|kv| kv.split_once('=')).collect();
            move |key: &str| -> Result<String> {
                fields
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| v.to_string())
                    .ok_or_else(|| Error::usage(format!("transcript header lacks {key}")))
            }
        };
        let num = |key: &str, v: String| -> Result<u64> {
            v.parse().map_err(|_| Error::usage(format!("bad {key} {v:?} in transcript header")))
        };
        Ok(TranscriptHeader {
            seed: num("seed", get("seed")?)?,
            n: num("n", get("n")?)? as usize,
            predicate: get("predicate")?,
            strategy: get("strategy")?,
            trial: num("trial", get("trial")?)?,
            weight: num("weight", get("weight")?)? as usize,
            values: get("values")?,
        })
    }
}
