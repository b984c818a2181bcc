//! Packed fixed-length bit strings.
//!
//! Bit `i` lives in word `i / 64` at bit `i % 64`. Bits past `len` in the last
//! word are always zero, so word-level popcount and equality are exact.

use std::fmt;

use rand::seq::index;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::randomness::CoinSource;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitVector {
            len: 0,
            words: Vec::with_capacity(words_for(bits)),
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVector::default();
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Builds a vector from packed words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVector { len, words };
        v.clear_tail();
        v
    }

    /// Parses a string of `0`/`1` characters, first character is bit 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut v = BitVector::with_capacity(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => v.push(false),
                '1' => v.push(true),
                other => {
                    return Err(Error::usage(format!(
                        "invalid bit character {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, value: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        if value {
            let i = self.len - 1;
            self.words[i / WORD] |= 1u64 << (i % WORD);
        }
    }

    /// Appends the low `count` bits of `value`, least significant first.
    pub fn push_word(&mut self, value: u64, count: usize) {
        debug_assert!(count <= WORD);
        if count == 0 {
            return;
        }
        let value = if count == WORD { value } else { value & ((1u64 << count) - 1) };
        let offset = self.len % WORD;
        if offset == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << offset;
            if offset + count > WORD {
                self.words.push(value >> (WORD - offset));
            }
        }
        self.len += count;
    }

    /// Reads `count <= 64` bits starting at `start` as an integer, bit `start` lowest.
    pub fn read_word(&self, start: usize, count: usize) -> u64 {
        assert!(count <= WORD && start + count <= self.len);
        if count == 0 {
            return 0;
        }
        let (w, off) = (start / WORD, start % WORD);
        let mut v = self.words[w] >> off;
        if off + count > WORD {
            v |= self.words[w + 1] << (WORD - off);
        }
        if count == WORD {
            v
        } else {
            v & ((1u64 << count) - 1)
        }
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        let full = other.len / WORD;
        for &w in &other.words[..full] {
            self.push_word(w, WORD);
        }
        let rest = other.len % WORD;
        if rest > 0 {
            self.push_word(other.words[full], rest);
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitVector::with_capacity(len);
        let mut pos = start;
        while pos < start + len {
            let take = (start + len - pos).min(WORD);
            out.push_word(self.read_word(pos, take), take);
            pos += take;
        }
        out
    }

    /// The sub-string at the given positions, in the given order.
    pub fn restrict(&self, positions: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(positions.len());
        for (j, &i) in positions.iter().enumerate() {
            if self.get(i) {
                out.words[j / WORD] |= 1u64 << (j % WORD);
            }
        }
        out
    }

    /// Hamming weight `|x|`.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of set bits in increasing order.
    pub fn iter_ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::usage(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Lowercase hex of the bits packed into bytes, bit 0 in the high bit of byte 0.
    /// The final byte is zero-padded.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(8) * 2);
        for byte_index in 0..self.len.div_ceil(8) {
            let mut byte = 0u8;
            for b in 0..8 {
                let i = byte_index * 8 + b;
                if i < self.len && self.get(i) {
                    byte |= 0x80 >> b;
                }
            }
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    /// Inverse of [`BitVector::to_hex`].
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(8) * 2 {
            return Err(Error::usage(format!(
                "hex string of {} chars cannot hold exactly {len} bits",
                hex.len()
            )));
        }
        let mut v = BitVector::zeros(len);
        for byte_index in 0..len.div_ceil(8) {
            let byte = u8::from_str_radix(&hex[2 * byte_index..2 * byte_index + 2], 16)
                .map_err(|e| Error::usage(format!("bad hex: {e}")))?;
            for b in 0..8 {
                let i = byte_index * 8 + b;
                let bit = byte & (0x80 >> b) != 0;
                if i < len {
                    v.set(i, bit);
                } else if bit {
                    return Err(Error::usage("nonzero padding bits in hex payload"));
                }
            }
        }
        Ok(v)
    }

    fn clear_tail(&mut self) {
        let rest = self.len % WORD;
        if rest != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rest) - 1;
            }
        }
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.index * WORD + bit)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({self})")
        } else {
            write!(f, "BitVector(len={}, hex={})", self.len, self.to_hex())
        }
    }
}

/// `|x ⊕ y|`.
pub fn hamming_distance(x: &BitVector, y: &BitVector) -> Result<usize> {
    if x.len != y.len {
        return Err(Error::usage(format!(
            "hamming distance of strings with lengths {} and {}",
            x.len, y.len
        )));
    }
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

/// `1` iff `|x|` is odd.
pub fn parity(x: &BitVector) -> bool {
    x.words.iter().fold(0u32, |acc, w| acc ^ w.count_ones()) & 1 == 1
}

pub fn complement(x: &BitVector) -> BitVector {
    let mut out = BitVector {
        len: x.len,
        words: x.words.iter().map(|w| !w).collect(),
    };
    out.clear_tail();
    out
}

/// Samples `x` uniform on `{0,1}^n` and `y = x ⊕ z` with `z` uniform among weight-`w` strings.
pub fn sample_pair_with_distance(
    n: usize,
    w: usize,
    coins: &CoinSource,
) -> Result<(BitVector, BitVector)> {
    if w > n {
        return Err(Error::usage(format!("distance {w} exceeds length {n}")));
    }
    let mut rng = coins.rng();
    let words = (0..words_for(n)).map(|_| rng.next_u64()).collect();
    let x = BitVector::from_words(n, words);
    let mut y = x.clone();
    for i in index::sample(&mut rng, n, w) {
        y.flip(i);
    }
    Ok((x, y))
}
