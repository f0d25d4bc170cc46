//! Bit-string combinatorics: subsequence counts, spectra and the
//! reverse/complement symmetry classes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Longest supported word.
pub const MAX_LEN: usize = 24;

/// A binary word of explicit length; symbol `i` lives in bit `i`.
///
/// Ordering is by length first, then by the packed integer value, which is
/// also the order of the output alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString {
    len: u8,
    bits: u32,
}

impl BitString {
    pub const EMPTY: BitString = BitString { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u32) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::Size { n: len, cap: MAX_LEN });
        }
        if u64::from(bits) >> len != 0 {
            return Err(domain(format!("bits {bits:#x} do not fit in {len} symbols")));
        }
        Ok(Self::from_raw(len, bits))
    }

    /// Caller guarantees `len <= MAX_LEN` and `bits < 2^len`.
    #[inline]
    pub(crate) const fn from_raw(len: usize, bits: u32) -> Self {
        BitString { len: len as u8, bits }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    fn mask(&self) -> u32 {
        ((1u64 << self.len) - 1) as u32
    }

    pub fn complement(&self) -> Self {
        Self::from_raw(self.len(), !self.bits & self.mask())
    }

    pub fn reverse(&self) -> Self {
        let bits = if self.len == 0 {
            0
        } else {
            self.bits.reverse_bits() >> (32 - self.len as u32)
        };
        Self::from_raw(self.len(), bits)
    }

    pub fn ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// All words of length `len` in increasing `bits` order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len <= MAX_LEN);
        (0..1u32 << len).map(move |b| BitString::from_raw(len, b))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses `"0110"`; `""` and `"ε"` give the empty word.
    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Self::EMPTY);
        }
        if s.len() > MAX_LEN {
            return Err(Error::Size { n: s.len(), cap: MAX_LEN });
        }
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(domain(format!("invalid symbol {c:?} in bit string"))),
            }
        }
        Ok(Self::from_raw(s.len(), bits))
    }
}

/// Number of index sets under which `y` occurs as a subsequence of `x`.
pub fn subseq_count(x: BitString, y: BitString) -> Result<u64> {
    if y.len() > x.len() {
        return Err(Error::OutputLongerThanInput { input: x.len(), output: y.len() });
    }
    // ways[j]: embeddings of y[..j] into the prefix of x read so far
    let mut ways = [0u64; MAX_LEN + 1];
    ways[0] = 1;
    for i in 0..x.len() {
        let xi = x.get(i);
        let hi = (i + 1).min(y.len());
        for j in (1..=hi).rev() {
            if y.get(j - 1) == xi {
                ways[j] += ways[j - 1];
            }
        }
    }
    Ok(ways[y.len()])
}

/// Visits every keep-mask of `x` and reports the kept subsequence.
///
/// The walk is depth-first over "keep / drop symbol i", so the total work is
/// `2^(len+1)` steps rather than `len * 2^len`.
pub(crate) fn for_each_subsequence(x: BitString, mut visit: impl FnMut(usize, u32)) {
    fn walk(x: u32, n: usize, pos: usize, len: usize, acc: u32, visit: &mut impl FnMut(usize, u32)) {
        if pos == n {
            visit(len, acc);
            return;
        }
        walk(x, n, pos + 1, len, acc, visit);
        let bit = (x >> pos) & 1;
        walk(x, n, pos + 1, len + 1, acc | (bit << len), visit);
    }
    walk(x.bits, x.len(), 0, 0, 0, &mut visit);
}

/// Like [`for_each_subsequence`] restricted to keep-masks of weight `k`.
pub(crate) fn for_each_subsequence_of_len(x: BitString, k: usize, mut visit: impl FnMut(u32)) {
    fn walk(x: u32, n: usize, k: usize, pos: usize, len: usize, acc: u32, visit: &mut impl FnMut(u32)) {
        if len == k {
            visit(acc);
            return;
        }
        // not enough symbols left to reach length k
        if n - pos < k - len {
            return;
        }
        walk(x, n, k, pos + 1, len, acc, visit);
        let bit = (x >> pos) & 1;
        walk(x, n, k, pos + 1, len + 1, acc | (bit << len), visit);
    }
    walk(x.bits, x.len(), k, 0, 0, 0, &mut visit);
}

/// Every distinct subsequence of `x` with its occurrence count, optionally
/// restricted to length `k_filter`.
pub fn subsequence_spectrum(x: BitString, k_filter: Option<usize>) -> Result<BTreeMap<BitString, u64>> {
    let mut out = BTreeMap::new();
    match k_filter {
        Some(k) if k > x.len() => {
            return Err(Error::OutputLongerThanInput { input: x.len(), output: k });
        }
        Some(k) => for_each_subsequence_of_len(x, k, |bits| {
            *out.entry(BitString::from_raw(k, bits)).or_insert(0) += 1;
        }),
        None => for_each_subsequence(x, |len, bits| {
            *out.entry(BitString::from_raw(len, bits)).or_insert(0) += 1;
        }),
    }
    Ok(out)
}

/// Smallest element of `{x, rev x, comp x, rev comp x}` by packed value.
pub fn canonical_class(x: BitString) -> BitString {
    let r = x.reverse();
    let c = x.complement();
    let rc = r.complement();
    *[x, r, c, rc].iter().min_by_key(|s| s.bits).unwrap()
}

/// Size of the reverse/complement orbit of `x` (1, 2 or 4).
pub fn orbit_size(x: BitString) -> usize {
    let mut orbit = [x, x.reverse(), x.complement(), x.reverse().complement()];
    orbit.sort_unstable();
    1 + orbit.windows(2).filter(|w| w[0] != w[1]).count()
}
