//! Narrow-sense binary BCH codes and their syndrome decoder.
//!
//! The syndrome of a word `p` is `p(x) mod g(x)`, which has exactly
//! `deg g` bits (the code's redundancy) and is GF(2)-linear in `p`. Since
//! `g(α^i) = 0` for `i = 1..=2t`, the power-sum syndromes needed by
//! Berlekamp–Massey are recovered as `S_i = (p mod g)(α^i)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Primitive polynomials over GF(2) for m = 2..=20, including the x^m term.
const PRIMITIVE_POLYS: [u32; 19] = [
    0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B, 0x20009, 0x40081, 0x80027, 0x100009,
];

pub const MAX_FIELD_BITS: u32 = 20;

/// GF(2^m) with log/antilog tables.
#[derive(Debug)]
pub struct GaloisField {
    m: u32,
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(m: u32) -> Result<Self> {
        if !(2..=MAX_FIELD_BITS).contains(&m) {
            return Err(Error::config(format!(
                "field GF(2^{m}) outside supported range 2..={MAX_FIELD_BITS}"
            )));
        }
        let poly = PRIMITIVE_POLYS[(m - 2) as usize];
        let order = (1u32 << m) - 1;
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; order as usize + 1];
        let mut x = 1u32;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(Error::config(format!("polynomial {poly:#x} is not primitive")));
            }
            exp[i as usize] = x;
            log[x as usize] = i;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::config(format!("polynomial {poly:#x} is not primitive")));
        }
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }
        Ok(GaloisField { m, order, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `α^e` for any exponent.
    pub fn alpha_pow(&self, e: u64) -> u32 {
        self.exp[(e % self.order as u64) as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "zero has no inverse");
        self.exp[((self.order - self.log[a as usize]) % self.order) as usize]
    }

    pub fn div(&self, a: u32, b: u32) -> u32 {
        self.mul(a, self.inv(b))
    }

    pub fn log(&self, a: u32) -> u32 {
        assert!(a != 0, "log of zero");
        self.log[a as usize]
    }
}

/// Binary BCH code of length `2^m - 1` with designed distance `2t + 1`,
/// used only on its first `positions` coordinates (the rest are zero padding).
#[derive(Debug)]
pub struct BchCode {
    field: GaloisField,
    t: usize,
    positions: usize,
    redundancy: usize,
    generator: BitVector,
    /// Row `i` holds `x^i mod g(x)` packed into `row_words` words.
    xpow: Vec<u64>,
    row_words: usize,
}

impl BchCode {
    /// Code correcting `t >= 1` errors among `positions` coordinates, over the
    /// smallest field with `2^m - 1 >= positions`.
    pub fn new(t: usize, positions: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::config("BCH code needs t >= 1"));
        }
        let mut m = 2u32;
        while ((1usize << m) - 1) < positions {
            m += 1;
            if m > MAX_FIELD_BITS {
                return Err(Error::config(format!(
                    "{positions} positions exceed the largest supported field"
                )));
            }
        }
        let field = GaloisField::new(m)?;
        let order = field.order() as usize;
        if 2 * t >= order {
            return Err(Error::config(format!(
                "designed distance {} too large for length {order}",
                2 * t + 1
            )));
        }
        let generator = generator_poly(&field, t);
        let redundancy = generator.len() - 1;
        if redundancy >= order {
            return Err(Error::config("generator polynomial fills the whole code"));
        }
        let row_words = redundancy.div_ceil(64).max(1);
        let low_g = generator.slice(0, redundancy);
        let mut xpow = vec![0u64; positions * row_words];
        let mut cur = vec![0u64; row_words];
        cur[0] = 1;
        let top = redundancy - 1;
        for i in 0..positions {
            xpow[i * row_words..(i + 1) * row_words].copy_from_slice(&cur);
            // cur <- x * cur mod g
            let carry = (cur[top / 64] >> (top % 64)) & 1 == 1;
            let mut spill = 0u64;
            for w in cur.iter_mut() {
                let out = *w >> 63;
                *w = (*w << 1) | spill;
                spill = out;
            }
            if redundancy % 64 != 0 {
                cur[row_words - 1] &= (1u64 << (redundancy % 64)) - 1;
            }
            if carry {
                for (w, g) in cur.iter_mut().zip(low_g.words()) {
                    *w ^= g;
                }
            }
        }
        Ok(BchCode {
            field,
            t,
            positions,
            redundancy,
            generator,
            xpow,
            row_words,
        })
    }

    /// Shared instance for a given `(t, positions)`; construction is not cheap.
    pub fn cached(t: usize, positions: usize) -> Result<Arc<BchCode>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BchCode>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(code) = cache.lock().unwrap().get(&(t, positions)) {
            return Ok(code.clone());
        }
        let code = Arc::new(BchCode::new(t, positions)?);
        cache
            .lock()
            .unwrap()
            .entry((t, positions))
            .or_insert(code.clone());
        Ok(code)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Number of syndrome bits, `deg g`.
    pub fn redundancy(&self) -> usize {
        self.redundancy
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn generator(&self) -> &BitVector {
        &self.generator
    }

    /// `p(x) mod g(x)` for a word of at most `positions` bits.
    pub fn syndrome(&self, word: &BitVector) -> Result<BitVector> {
        if word.len() > self.positions {
            return Err(Error::usage(format!(
                "word of {} bits exceeds code positions {}",
                word.len(),
                self.positions
            )));
        }
        Ok(self.syndrome_of_positions(word.iter_ones()))
    }

    /// Syndrome of the word whose support is `ones` (each `< positions`).
    pub fn syndrome_of_positions(&self, ones: impl IntoIterator<Item = usize>) -> BitVector {
        let mut acc = vec![0u64; self.row_words];
        for i in ones {
            let row = &self.xpow[i * self.row_words..(i + 1) * self.row_words];
            for (a, r) in acc.iter_mut().zip(row) {
                *a ^= r;
            }
        }
        BitVector::from_words(self.redundancy, acc)
    }

    /// Finds the unique support of weight `<= t` with this syndrome, restricted
    /// to the first `positions` coordinates. `Ok(None)` when decoding fails.
    ///
    /// A word of weight `> t` may decode to a wrong low-weight support; callers
    /// that care must verify the result independently.
    pub fn decode(&self, syndrome: &BitVector) -> Result<Option<Vec<usize>>> {
        if syndrome.len() != self.redundancy {
            return Err(Error::usage(format!(
                "syndrome has {} bits, code redundancy is {}",
                syndrome.len(),
                self.redundancy
            )));
        }
        if syndrome.is_zero() {
            return Ok(Some(Vec::new()));
        }
        let s = self.power_sums(syndrome);
        let (locator, length) = berlekamp_massey(&self.field, &s);
        let degree = locator.len() - 1;
        if degree != length || degree == 0 || degree > self.t {
            return Ok(None);
        }
        Ok(self.locate(&locator))
    }

    /// `S_1..S_2t` as `s[0..2t]`.
    fn power_sums(&self, syndrome: &BitVector) -> Vec<u32> {
        let f = &self.field;
        let ones: Vec<u32> = syndrome.iter_ones().map(|b| b as u32).collect();
        let order = f.order();
        let mut s = vec![0u32; 2 * self.t];
        for i in (1..=2 * self.t).step_by(2) {
            let mut acc = 0u32;
            for &b in &ones {
                acc ^= f.exp[((i as u64 * b as u64) % order as u64) as usize];
            }
            s[i - 1] = acc;
        }
        for i in (2..=2 * self.t).step_by(2) {
            let half = s[i / 2 - 1];
            s[i - 1] = f.mul(half, half);
        }
        s
    }

    /// Exhaustive root search of the locator over the usable positions.
    fn locate(&self, locator: &[u32]) -> Option<Vec<usize>> {
        let f = &self.field;
        let order = f.order();
        let degree = locator.len() - 1;
        // terms[j] holds log(Λ_j) + j * (-pos) (mod order), for nonzero Λ_j
        let mut terms: Vec<(u32, u32)> = locator
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (f.log(c), (order - (j as u32 % order)) % order))
            .collect();
        let mut roots = Vec::with_capacity(degree);
        for pos in 0..self.positions {
            let mut sum = locator[0];
            for (lg, _) in &terms {
                sum ^= f.exp[*lg as usize];
            }
            if sum == 0 {
                roots.push(pos);
                if roots.len() == degree {
                    return Some(roots);
                }
            }
            for (lg, step) in terms.iter_mut() {
                *lg += *step;
                if *lg >= order {
                    *lg -= order;
                }
            }
        }
        None
    }
}

/// Berlekamp–Massey over GF(2^m). Returns the connection polynomial
/// `Λ(x) = 1 + Λ_1 x + ...` (trailing zeros trimmed) and the linear
/// complexity `L` of the sequence.
pub fn berlekamp_massey(field: &GaloisField, s: &[u32]) -> (Vec<u32>, usize) {
    let mut c = vec![1u32];
    let mut b = vec![1u32];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last = 1u32;
    for n in 0..s.len() {
        let mut delta = s[n];
        for i in 1..=l.min(c.len() - 1) {
            delta ^= field.mul(c[i], s[n - i]);
        }
        if delta == 0 {
            shift += 1;
            continue;
        }
        let coef = field.div(delta, last);
        let mut next = c.clone();
        if next.len() < b.len() + shift {
            next.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + shift] ^= field.mul(coef, bi);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = c;
            last = delta;
            shift = 1;
        } else {
            shift += 1;
        }
        c = next;
    }
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    (c, l)
}

/// `lcm` of the minimal polynomials of `α^1..α^2t`, as GF(2) coefficients.
fn generator_poly(field: &GaloisField, t: usize) -> BitVector {
    let order = field.order() as usize;
    let mut seen = vec![false; order];
    let mut g = BitVector::from_bits([true]);
    for i in 1..=2 * t {
        let start = i % order;
        if seen[start] {
            continue;
        }
        let mut coset = Vec::new();
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            coset.push(e);
            e = (2 * e) % order;
        }
        g = gf2_poly_mul(&g, &minimal_poly(field, &coset));
    }
    g
}

/// `∏ (x + α^e)` over a cyclotomic coset; the coefficients lie in GF(2).
fn minimal_poly(field: &GaloisField, coset: &[usize]) -> BitVector {
    let mut poly = vec![1u32];
    for &e in coset {
        let root = field.alpha_pow(e as u64);
        let mut next = vec![0u32; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= field.mul(c, root);
        }
        poly = next;
    }
    BitVector::from_bits(poly.iter().map(|&c| {
        debug_assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
        c == 1
    }))
}

fn gf2_poly_mul(a: &BitVector, b: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(a.len() + b.len() - 1);
    for i in a.iter_ones() {
        for j in b.iter_ones() {
            out.flip(i + j);
        }
    }
    out
}
