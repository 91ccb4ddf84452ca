//! Reduced words in the free group `F_r`.
//!
//! Letters are signed integers: `i > 0` is the generator `a_i`, `-i` its
//! inverse. A [`ReducedWord`] never contains an adjacent pair `(x, -x)`, and
//! doubles as the name of a group element, a vertex of the Cayley tree and a
//! cylinder label on the boundary.

mod counting;
mod sphere;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use counting::{
    count_avoiding, count_prefix_suffix, count_prefix_suffix_enumerated, enumerate_prefixed,
    enumerate_sphere, prefix_suffix_histogram, sphere_count, sphere_len, PrefixSuffixHistogram,
    SphereIter,
};
pub(crate) use sphere::{fold_words, Codes};
pub use sphere::SphereIndex;

/// Rank of the free group, `r >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(u32);

impl Rank {
    /// Largest supported rank; letters are packed into `u16` codes internally.
    pub const MAX: u32 = 16_000;

    pub fn new(r: i64) -> Result<Self> {
        if (2..=Self::MAX as i64).contains(&r) {
            Ok(Rank(r as u32))
        } else {
            Err(Error::InvalidRank {
                got: r,
                max: Self::MAX,
            })
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `2r - 1`, the branching number of the tree past the root.
    pub fn q(self) -> u64 {
        2 * self.0 as u64 - 1
    }

    /// `2r`, the number of letters.
    pub fn alphabet_len(self) -> usize {
        2 * self.0 as usize
    }

    /// All letters in increasing order of value: `-r, ..., -1, 1, ..., r`.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        let r = self.0 as i32;
        (-r..=r).filter(|&i| i != 0).map(Letter)
    }

    pub fn check_letter(self, l: Letter) -> Result<()> {
        if l.0.unsigned_abs() <= self.0 {
            Ok(())
        } else {
            Err(Error::LetterOutOfRange {
                letter: l.0,
                rank: self.0,
            })
        }
    }

    pub fn check_word(self, w: &ReducedWord) -> Result<()> {
        w.letters.iter().try_for_each(|&l| self.check_letter(l))
    }

    /// Position of `l` in [`Rank::letters`].
    pub(crate) fn code(self, l: Letter) -> u16 {
        let r = self.0 as i32;
        let c = if l.0 < 0 { l.0 + r } else { l.0 + r - 1 };
        c as u16
    }

    pub(crate) fn letter(self, code: u16) -> Letter {
        let r = self.0 as i32;
        let c = code as i32;
        Letter(if c < r { c - r } else { c - r + 1 })
    }

    pub(crate) fn inv_code(self, code: u16) -> u16 {
        (2 * self.0 - 1) as u16 - code
    }

    pub(crate) fn codes(self, w: &ReducedWord) -> Codes {
        w.letters.iter().map(|&l| self.code(l)).collect()
    }

    pub(crate) fn word(self, codes: &[u16]) -> ReducedWord {
        ReducedWord {
            letters: codes.iter().map(|&c| self.letter(c)).collect(),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A generator or inverse generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn new(value: i32) -> Result<Self> {
        if value == 0 {
            Err(Error::Parse("letter 0 does not exist".into()))
        } else {
            Ok(Letter(value))
        }
    }

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// `a..z` for generators, `A..Z` for inverses, when `|value| <= 26`.
    pub fn to_char(self) -> Option<char> {
        let k = self.0.unsigned_abs();
        if !(1..=26).contains(&k) {
            return None;
        }
        let base = if self.0 > 0 { b'a' } else { b'A' };
        Some((base + (k - 1) as u8) as char)
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter(c as i32 - 'a' as i32 + 1)),
            'A'..='Z' => Some(Letter(-(c as i32 - 'A' as i32 + 1))),
            _ => None,
        }
    }
}

/// A reduced word; the empty word is the identity `e`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord::default()
    }

    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(pos) = letters.windows(2).position(|w| w[0] == w[1].inverse()) {
            return Err(Error::NotReduced { pos });
        }
        Ok(ReducedWord { letters })
    }

    pub fn from_ints(values: &[i32]) -> Result<Self> {
        let letters = values
            .iter()
            .map(|&v| Letter::new(v))
            .collect::<Result<Vec<_>>>()?;
        ReducedWord::new(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced form of the concatenation `self * other`.
    pub fn multiply(&self, other: &ReducedWord) -> ReducedWord {
        let c = self
            .letters
            .iter()
            .rev()
            .zip(&other.letters)
            .take_while(|(x, y)| **x == y.inverse())
            .count();
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * c);
        letters.extend_from_slice(&self.letters[..self.len() - c]);
        letters.extend_from_slice(&other.letters[c..]);
        ReducedWord { letters }
    }

    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord {
            letters: self.letters[..k.min(self.len())].to_vec(),
        }
    }

    pub fn suffix(&self, k: usize) -> ReducedWord {
        let k = k.min(self.len());
        ReducedWord {
            letters: self.letters[self.len() - k..].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &ReducedWord) -> bool {
        other.letters.starts_with(&self.letters)
    }

    /// Appends a letter, failing if it would cancel.
    pub fn push(&mut self, l: Letter) -> Result<()> {
        if self.last() == Some(l.inverse()) {
            return Err(Error::NotReduced {
                pos: self.len() - 1,
            });
        }
        self.letters.push(l);
        Ok(())
    }

    /// Letter-string form (`aBa`) when every letter has `|value| <= 26`.
    pub fn to_letter_string(&self) -> Option<String> {
        self.letters.iter().map(|l| l.to_char()).collect()
    }

    /// Signed-integer form `1,-2,1`; empty for the identity.
    pub fn to_canonical_string(&self) -> String {
        self.letters
            .iter()
            .map(|l| l.0.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Letter form if available, else the canonical integer form; `e` for the identity.
    pub fn pretty(&self) -> String {
        if self.is_empty() {
            return "e".into();
        }
        self.to_letter_string()
            .unwrap_or_else(|| self.to_canonical_string())
    }
}

/// Length of the longest common prefix of `u` and `v`.
pub fn common_prefix_len(u: &ReducedWord, v: &ReducedWord) -> usize {
    u.letters
        .iter()
        .zip(&v.letters)
        .take_while(|(x, y)| x == y)
        .count()
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Accepts `1,-2,1`, letter strings `aBa`, and `""`/`()` for the identity.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "()" {
            return Ok(ReducedWord::identity());
        }
        let numeric = text
            .chars()
            .all(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == ',' || c.is_whitespace());
        let letters = if numeric {
            text.split(',')
                .map(|tok| {
                    let v: i32 = tok
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad letter {tok:?} in {text:?}")))?;
                    Letter::new(v)
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            text.chars()
                .map(|c| {
                    Letter::from_char(c)
                        .ok_or_else(|| Error::Parse(format!("bad letter {c:?} in {text:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        ReducedWord::new(letters)
    }
}

/// Parses a word and checks it against `rank`.
pub fn parse_word(text: &str, rank: Rank) -> Result<ReducedWord> {
    let w: ReducedWord = text.parse()?;
    rank.check_word(&w)?;
    Ok(w)
}

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Group operations of `F_r` with rank checking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    rank: Rank,
}

impl FreeGroup {
    pub fn new(rank: Rank) -> Self {
        FreeGroup { rank }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn multiply(&self, u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord> {
        self.rank.check_word(u)?;
        self.rank.check_word(v)?;
        Ok(u.multiply(v))
    }

    pub fn inverse(&self, u: &ReducedWord) -> Result<ReducedWord> {
        self.rank.check_word(u)?;
        Ok(u.inverse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(w("ab").multiply(&w("Ba")), w("aa"));
        assert_eq!(w("a").multiply(&w("b")), w("ab"));
        let u = w("abAAb");
        assert_eq!(u.multiply(&u.inverse()), ReducedWord::identity());
        assert_eq!(w("aba").multiply(&w("ABc")), w("ac"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(w("ab").inverse(), w("BA"));
        assert_eq!(ReducedWord::identity().inverse(), ReducedWord::identity());
        let u = w("aBcA");
        assert_eq!(u.inverse().inverse(), u);
    }

    #[test]
    fn common_prefix_examples() {
        assert_eq!(common_prefix_len(&w("aba"), &w("abb")), 2);
        assert_eq!(common_prefix_len(&w("a"), &w("b")), 0);
        let u = w("abAB");
        assert_eq!(common_prefix_len(&u, &u), 4);
    }

    #[test]
    fn parsing() {
        assert_eq!(w("aB"), ReducedWord::from_ints(&[1, -2]).unwrap());
        assert_eq!(w("1,-2"), w("aB"));
        assert_eq!("aA".parse::<ReducedWord>(), Err(Error::NotReduced { pos: 0 }));
        assert!("1,0".parse::<ReducedWord>().is_err());
        assert!("a?".parse::<ReducedWord>().is_err());
        assert_eq!(w(""), ReducedWord::identity());
        let r2 = Rank::new(2).unwrap();
        assert!(parse_word("c", r2).is_err());
        assert!(parse_word("abAB", r2).is_ok());
    }

    #[test]
    fn printing_roundtrip() {
        for s in ["1,-2,1", "3,3,-1", ""] {
            assert_eq!(w(s).to_canonical_string(), s);
        }
        assert_eq!(w("aBa").to_letter_string().unwrap(), "aBa");
        assert_eq!(w("1,-2,1").pretty(), "aBa");
        assert_eq!(w("27").pretty(), "27");
    }

    #[test]
    fn codes_roundtrip_and_order() {
        let r = Rank::new(3).unwrap();
        let letters: Vec<_> = r.letters().collect();
        assert_eq!(letters.len(), 6);
        for (i, l) in letters.iter().enumerate() {
            assert_eq!(r.code(*l) as usize, i);
            assert_eq!(r.letter(i as u16), *l);
            assert_eq!(r.letter(r.inv_code(i as u16)), l.inverse());
        }
    }

    #[test]
    fn rank_bounds() {
        assert!(Rank::new(1).is_err());
        assert!(Rank::new(2).is_ok());
        assert_eq!(Rank::new(3).unwrap().q(), 5);
        let g = FreeGroup::new(Rank::new(2).unwrap());
        assert!(matches!(
            g.multiply(&w("a"), &w("c")),
            Err(Error::LetterOutOfRange { .. })
        ));
    }

    #[test]
    fn push_rejects_cancellation() {
        let mut u = w("ab");
        assert!(u.push(Letter::new(-2).unwrap()).is_err());
        u.push(Letter::new(1).unwrap()).unwrap();
        assert_eq!(u, w("aba"));
    }
}
