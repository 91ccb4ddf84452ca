//! Lexicographic enumeration and dense indexing of spheres.
//!
//! Inside hot loops a word is a slice of `u16` letter codes: the position of
//! the letter in `-r, ..., -1, 1, ..., r`. The inverse of code `c` is
//! `2r - 1 - c`, and lexicographic order on codes is lexicographic order on
//! letter values.
//!
//! Within a sphere `S_d` the words sharing a prefix occupy a contiguous block
//! of indices, so a cylinder `B_u` at depth `d` is a range.

use std::ops::Range;

use rayon::prelude::*;

use super::{Rank, ReducedWord};
use crate::error::{Error, Result};

pub(crate) type Codes = Vec<u16>;

/// Dense lexicographic index of the sphere `S_depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereIndex {
    rank: Rank,
    depth: usize,
    // pow[i] = q^i for i < depth
    pow: Vec<usize>,
    len: usize,
}

impl SphereIndex {
    pub fn new(rank: Rank, depth: usize) -> Result<Self> {
        let q = rank.q() as usize;
        let overflow = || Error::DimensionCap {
            dim: u128::MAX,
            cap: usize::MAX as u128,
        };
        let mut pow = Vec::with_capacity(depth);
        let mut p = 1usize;
        for i in 0..depth {
            pow.push(p);
            if i + 1 < depth {
                p = p.checked_mul(q).ok_or_else(overflow)?;
            }
        }
        let len = if depth == 0 {
            1
        } else {
            pow[depth - 1]
                .checked_mul(rank.alphabet_len())
                .ok_or_else(overflow)?
        };
        Ok(SphereIndex {
            rank,
            depth,
            pow,
            len,
        })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `|S_depth|`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, w: &ReducedWord) -> usize {
        assert_eq!(w.len(), self.depth, "word length must equal the depth");
        self.index_of_codes(&self.rank.codes(w))
    }

    pub(crate) fn index_of_codes(&self, codes: &[u16]) -> usize {
        debug_assert_eq!(codes.len(), self.depth);
        level_index(self.rank, codes, &self.pow)
    }

    /// Indices of the depth-`depth` words extending `prefix`.
    pub fn prefix_range(&self, prefix: &ReducedWord) -> Range<usize> {
        self.prefix_range_codes(&self.rank.codes(prefix))
    }

    pub(crate) fn prefix_range_codes(&self, prefix: &[u16]) -> Range<usize> {
        let m = prefix.len();
        assert!(m <= self.depth, "prefix longer than the depth");
        if m == 0 {
            return 0..self.len;
        }
        let width = self.pow[self.depth - m];
        let start = level_index(self.rank, prefix, &self.pow[..m]) * width;
        start..start + width
    }

    pub fn word_at(&self, index: usize) -> ReducedWord {
        let mut codes = Vec::with_capacity(self.depth);
        self.codes_at(index, &mut codes);
        self.rank.word(&codes)
    }

    pub(crate) fn codes_at(&self, index: usize, out: &mut Codes) {
        assert!(index < self.len);
        out.clear();
        if self.depth == 0 {
            return;
        }
        let mut rem = index;
        let lead = self.pow[self.depth - 1];
        out.push((rem / lead) as u16);
        rem %= lead;
        for i in 1..self.depth {
            let p = self.pow[self.depth - 1 - i];
            let digit = (rem / p) as u16;
            rem %= p;
            let forbidden = self.rank.inv_code(out[i - 1]);
            out.push(if digit < forbidden { digit } else { digit + 1 });
        }
    }
}

/// Index of `codes` within `S_{codes.len()}`; `pow` must hold `q^0, q^1, ...`
/// with at least `codes.len()` entries; only the first `codes.len()` are used.
fn level_index(rank: Rank, codes: &[u16], pow: &[usize]) -> usize {
    let m = codes.len();
    if m == 0 {
        return 0;
    }
    let mut idx = codes[0] as usize * pow[m - 1];
    for i in 1..m {
        let forbidden = rank.inv_code(codes[i - 1]);
        let c = codes[i];
        let digit = if c < forbidden { c } else { c - 1 };
        idx += digit as usize * pow[m - 1 - i];
    }
    idx
}

/// Lexicographic odometer over reduced words of a fixed length with a fixed prefix.
pub(crate) struct Odometer {
    rank: Rank,
    codes: Codes,
    fixed: usize,
    state: OdoState,
}

#[derive(PartialEq, Eq)]
enum OdoState {
    Fresh,
    Running,
    Done,
}

impl Odometer {
    /// Words of length `len` extending `prefix` (which must be reduced).
    pub fn new(rank: Rank, prefix: &[u16], len: usize) -> Self {
        let mut codes = Vec::with_capacity(len);
        codes.extend_from_slice(prefix);
        let state = if prefix.len() > len {
            OdoState::Done
        } else {
            OdoState::Fresh
        };
        let mut odo = Odometer {
            rank,
            codes,
            fixed: prefix.len(),
            state,
        };
        if odo.state == OdoState::Fresh {
            let start = odo.fixed;
            odo.codes.resize(len, 0);
            odo.fill_min(start);
        }
        odo
    }

    fn min_after(&self, prev: Option<u16>) -> u16 {
        match prev {
            Some(p) if self.rank.inv_code(p) == 0 => 1,
            _ => 0,
        }
    }

    fn fill_min(&mut self, from: usize) {
        for i in from..self.codes.len() {
            let prev = if i == 0 { None } else { Some(self.codes[i - 1]) };
            self.codes[i] = self.min_after(prev);
        }
    }

    pub fn next_codes(&mut self) -> Option<&[u16]> {
        match self.state {
            OdoState::Done => return None,
            OdoState::Fresh => {
                self.state = OdoState::Running;
                return Some(&self.codes);
            }
            OdoState::Running => {}
        }
        let top = self.rank.alphabet_len() as u16;
        let mut i = self.codes.len();
        while i > self.fixed {
            i -= 1;
            let forbidden = if i == 0 {
                None
            } else {
                Some(self.rank.inv_code(self.codes[i - 1]))
            };
            let mut c = self.codes[i] + 1;
            if Some(c) == forbidden {
                c += 1;
            }
            if c < top {
                self.codes[i] = c;
                self.fill_min(i + 1);
                return Some(&self.codes);
            }
        }
        self.state = OdoState::Done;
        None
    }
}

/// Folds over every reduced word of length `len` extending `prefix`, in
/// parallel over the letter that follows the prefix. The reduction must be
/// order-independent.
pub(crate) fn fold_words<T, I, F, R>(
    rank: Rank,
    prefix: &[u16],
    len: usize,
    identity: I,
    fold: F,
    reduce: R,
) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, &[u16]) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    if prefix.len() >= len {
        let mut acc = identity();
        if prefix.len() == len {
            acc = fold(acc, prefix);
        }
        return acc;
    }
    let forbidden = prefix.last().map(|&c| rank.inv_code(c));
    (0..rank.alphabet_len() as u16)
        .into_par_iter()
        .filter(|&c| Some(c) != forbidden)
        .map(|c| {
            let mut p = prefix.to_vec();
            p.push(c);
            let mut odo = Odometer::new(rank, &p, len);
            let mut acc = identity();
            while let Some(codes) = odo.next_codes() {
                acc = fold(acc, codes);
            }
            acc
        })
        .reduce(&identity, &reduce)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_reduced(rank: Rank, codes: &[u16]) -> bool {
        codes.windows(2).all(|w| w[1] != rank.inv_code(w[0]))
    }

    #[test]
    fn odometer_counts_and_order() {
        for r in 2..=3 {
            let rank = Rank::new(r).unwrap();
            for n in 0..=5 {
                let mut odo = Odometer::new(rank, &[], n);
                let mut all = Vec::new();
                while let Some(c) = odo.next_codes() {
                    assert!(is_reduced(rank, c));
                    all.push(c.to_vec());
                }
                let expected = if n == 0 {
                    1
                } else {
                    2 * r as usize * (2 * r as usize - 1).pow(n as u32 - 1)
                };
                assert_eq!(all.len(), expected);
                assert!(all.windows(2).all(|w| w[0] < w[1]), "lexicographic");
            }
        }
    }

    #[test]
    fn index_matches_enumeration_order() {
        let rank = Rank::new(2).unwrap();
        for d in 0..=5 {
            let idx = SphereIndex::new(rank, d).unwrap();
            let mut odo = Odometer::new(rank, &[], d);
            let mut i = 0;
            let mut buf = Vec::new();
            while let Some(c) = odo.next_codes() {
                assert_eq!(idx.index_of_codes(c), i);
                idx.codes_at(i, &mut buf);
                assert_eq!(buf.as_slice(), c);
                i += 1;
            }
            assert_eq!(i, idx.len());
        }
    }

    #[test]
    fn prefix_ranges_are_blocks() {
        let rank = Rank::new(3).unwrap();
        let idx = SphereIndex::new(rank, 4).unwrap();
        let mut buf = Vec::new();
        for p in 0..=4 {
            let mut odo = Odometer::new(rank, &[], p);
            while let Some(pre) = odo.next_codes() {
                let range = idx.prefix_range_codes(pre);
                let expected = if p == 0 { 6 * 125 } else { 5usize.pow((4 - p) as u32) };
                assert_eq!(range.len(), expected);
                for i in range {
                    idx.codes_at(i, &mut buf);
                    assert_eq!(&buf[..p], pre);
                }
            }
        }
    }

    #[test]
    fn prefixed_odometer() {
        let rank = Rank::new(2).unwrap();
        let mut odo = Odometer::new(rank, &[2, 3], 4);
        let mut n = 0;
        while let Some(c) = odo.next_codes() {
            assert_eq!(&c[..2], &[2, 3]);
            n += 1;
        }
        assert_eq!(n, 9);
        assert!(Odometer::new(rank, &[0, 0], 1).next_codes().is_none());
    }

    #[test]
    fn fold_counts() {
        let rank = Rank::new(2).unwrap();
        let total = fold_words(rank, &[], 6, || 0u64, |a, _| a + 1, |a, b| a + b);
        assert_eq!(total, 4 * 243);
        let pre = fold_words(rank, &[1], 3, || 0u64, |a, _| a + 1, |a, b| a + b);
        assert_eq!(pre, 9);
        let exact = fold_words(rank, &[1, 1], 2, || 0u64, |a, _| a + 1, |a, b| a + b);
        assert_eq!(exact, 1);
    }
}
