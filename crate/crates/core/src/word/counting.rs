//! Sphere sizes, enumeration streams and the prefix/suffix counts behind
//! equidistribution of `(gamma, gamma^-1)` pairs.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::sphere::{fold_words, Odometer, SphereIndex};
use super::{Letter, Rank, ReducedWord};
use crate::error::{Error, Result};

/// `|S_n|`: 1 for `n = 0`, else `2r (2r-1)^(n-1)`.
pub fn sphere_count(rank: Rank, n: usize) -> BigUint {
    if n == 0 {
        return BigUint::from(1u32);
    }
    BigUint::from(rank.alphabet_len()) * num_traits::pow(BigUint::from(rank.q()), n - 1)
}

/// `|S_n|` as a `usize`, or a dimension error if it does not fit.
pub fn sphere_len(rank: Rank, n: usize) -> Result<usize> {
    let c = sphere_count(rank, n);
    c.to_usize().ok_or(Error::DimensionCap {
        dim: c.to_u128().unwrap_or(u128::MAX),
        cap: usize::MAX as u128,
    })
}

/// Stream of reduced words of one length, in lexicographic order of letter values.
pub struct SphereIter {
    rank: Rank,
    odo: Odometer,
}

impl Iterator for SphereIter {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        let rank = self.rank;
        self.odo.next_codes().map(|c| rank.word(c))
    }
}

pub fn enumerate_sphere(rank: Rank, n: usize) -> SphereIter {
    SphereIter {
        rank,
        odo: Odometer::new(rank, &[], n),
    }
}

/// Stream of `Pr_u(k)`: words of length `k` with prefix `u`.
pub fn enumerate_prefixed(rank: Rank, u: &ReducedWord, k: usize) -> Result<SphereIter> {
    rank.check_word(u)?;
    if u.is_empty() {
        return Err(Error::EmptyWord("prefix enumeration needs a nonempty prefix"));
    }
    if k < u.len() {
        return Err(Error::LengthBelowPrefix {
            requested: k,
            prefix: u.len(),
        });
    }
    Ok(SphereIter {
        rank,
        odo: Odometer::new(rank, &rank.codes(u), k),
    })
}

/// Words of length `j` not starting with code `s` and not ending with code `t`,
/// by a transfer count over the last letter.
fn avoiding_direct(rank: Rank, j: usize, s: u16, t: u16) -> u128 {
    if j == 0 {
        return 1;
    }
    let n = rank.alphabet_len();
    let mut ending: Vec<u128> = (0..n as u16).map(|c| u128::from(c != s)).collect();
    for _ in 1..j {
        let total: u128 = ending.iter().sum();
        ending = (0..n as u16)
            .map(|c| total - ending[rank.inv_code(c) as usize])
            .collect();
    }
    ending
        .iter()
        .enumerate()
        .filter(|(c, _)| *c as u16 != t)
        .map(|(_, v)| v)
        .sum()
}

/// `|S_m(s, t)|`: reduced words of length `m` that do not start with `s` and
/// do not end with `t`.
///
/// For `m >= 5` this uses the four-step closed form
/// `|S_{4k+j}(s,t)| = q^(1+j) (q^(4k) - 1) / (2r) + |S_j(s,t)|` with residues
/// `j` in `1..=4`; the two-step recurrence it unrolls is only valid down to
/// length 3, so residue 0 is anchored at `j = 4` rather than `j = 0`.
pub fn count_avoiding(rank: Rank, m: usize, s: Letter, t: Letter) -> Result<BigUint> {
    rank.check_letter(s)?;
    rank.check_letter(t)?;
    let (sc, tc) = (rank.code(s), rank.code(t));
    if m <= 4 {
        return Ok(BigUint::from(avoiding_direct(rank, m, sc, tc)));
    }
    let k = (m - 1) / 4;
    let j = m - 4 * k;
    let q = BigUint::from(rank.q());
    let q4k = num_traits::pow(q.clone(), 4 * k);
    let numer = num_traits::pow(q, 1 + j) * (q4k - 1u32);
    let two_r = BigUint::from(rank.alphabet_len());
    debug_assert!((&numer % &two_r).is_zero());
    Ok(numer / two_r + BigUint::from(avoiding_direct(rank, j, sc, tc)))
}

fn check_nonempty(u: &ReducedWord, v: &ReducedWord) -> Result<()> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyWord(
            "prefix/suffix counts need nonempty u and v; use sphere counts instead",
        ));
    }
    Ok(())
}

/// `|S_n^{u,v}|`: words of length `n` with prefix `u` and suffix `v^-1`.
///
/// Once `n > |u| + |v|` this is `|S_{n-|u|-|v|}(s, t)|` with `s` the inverse
/// of the last letter of `u` and `t` the last letter of `v`. Shorter lengths,
/// where prefix and suffix overlap, are enumerated.
pub fn count_prefix_suffix(
    rank: Rank,
    n: usize,
    u: &ReducedWord,
    v: &ReducedWord,
) -> Result<BigUint> {
    check_nonempty(u, v)?;
    rank.check_word(u)?;
    rank.check_word(v)?;
    if n < u.len() || n < v.len() {
        return Ok(BigUint::zero());
    }
    if n > u.len() + v.len() {
        let s = u.last().expect("nonempty").inverse();
        let t = v.last().expect("nonempty");
        return count_avoiding(rank, n - u.len() - v.len(), s, t);
    }
    let suffix = rank.codes(&v.inverse());
    let count = fold_words(
        rank,
        &rank.codes(u),
        n,
        || 0u64,
        |acc, w| acc + u64::from(w.ends_with(&suffix)),
        |a, b| a + b,
    );
    Ok(BigUint::from(count))
}

/// Brute-force `|S_n^{u,v}|` over the whole sphere.
pub fn count_prefix_suffix_enumerated(
    rank: Rank,
    n: usize,
    u: &ReducedWord,
    v: &ReducedWord,
) -> Result<BigUint> {
    check_nonempty(u, v)?;
    rank.check_word(u)?;
    rank.check_word(v)?;
    let prefix = rank.codes(u);
    let suffix = rank.codes(&v.inverse());
    let count = fold_words(
        rank,
        &[],
        n,
        || 0u64,
        |acc, w| acc + u64::from(w.starts_with(&prefix) && w.ends_with(&suffix)),
        |a, b| a + b,
    );
    Ok(BigUint::from(count))
}

/// Joint counts of (first `a` letters, last `b` letters) over `S_n`, from a
/// single enumeration pass.
#[derive(Clone, Debug)]
pub struct PrefixSuffixHistogram {
    rank: Rank,
    n: usize,
    prefix_index: SphereIndex,
    suffix_index: SphereIndex,
    counts: Vec<u64>,
}

impl PrefixSuffixHistogram {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `gamma` in `S_n` starting with `prefix` and ending with `suffix`.
    pub fn get(&self, prefix: &ReducedWord, suffix: &ReducedWord) -> u64 {
        if prefix.len() != self.prefix_index.depth() || suffix.len() != self.suffix_index.depth()
        {
            return 0;
        }
        let i = self.prefix_index.index_of_codes(&self.rank.codes(prefix));
        let j = self.suffix_index.index_of_codes(&self.rank.codes(suffix));
        self.counts[i * self.suffix_index.len() + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn prefix_suffix_histogram(
    rank: Rank,
    n: usize,
    a: usize,
    b: usize,
) -> Result<PrefixSuffixHistogram> {
    if a > n || b > n {
        return Err(Error::LengthBelowPrefix {
            requested: n,
            prefix: a.max(b),
        });
    }
    let prefix_index = SphereIndex::new(rank, a)?;
    let suffix_index = SphereIndex::new(rank, b)?;
    let width = suffix_index.len();
    let size = prefix_index.len() * width;
    let counts = fold_words(
        rank,
        &[],
        n,
        || vec![0u64; size],
        |mut acc, w| {
            let i = prefix_index.index_of_codes(&w[..a]);
            let j = suffix_index.index_of_codes(&w[n - b..]);
            acc[i * width + j] += 1;
            acc
        },
        |mut x, y| {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            x
        },
    );
    Ok(PrefixSuffixHistogram {
        rank,
        n,
        prefix_index,
        suffix_index,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(r: i64) -> Rank {
        Rank::new(r).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn l(s: &str) -> Letter {
        w(s).first().unwrap()
    }

    fn brute_avoiding(rank: Rank, m: usize, s: Letter, t: Letter) -> u64 {
        enumerate_sphere(rank, m)
            .filter(|g| g.first() != Some(s) && g.last() != Some(t))
            .count() as u64
    }

    #[test]
    fn sphere_count_examples() {
        assert_eq!(sphere_count(rank(2), 0), BigUint::from(1u32));
        assert_eq!(sphere_count(rank(2), 1), BigUint::from(4u32));
        assert_eq!(sphere_count(rank(2), 2), BigUint::from(12u32));
        assert_eq!(sphere_count(rank(3), 3), BigUint::from(150u32));
    }

    #[test]
    fn enumerate_sphere_examples() {
        let e: Vec<_> = enumerate_sphere(rank(2), 0).collect();
        assert_eq!(e, vec![ReducedWord::identity()]);
        assert_eq!(enumerate_sphere(rank(2), 1).count(), 4);
        let s2: Vec<_> = enumerate_sphere(rank(2), 2).collect();
        assert_eq!(s2.len(), 12);
        for g in &s2 {
            assert!(ReducedWord::new(g.letters().to_vec()).is_ok());
        }
        let first: Vec<_> = enumerate_sphere(rank(2), 1).map(|g| g.pretty()).collect();
        assert_eq!(first, ["B", "A", "a", "b"]);
    }

    #[test]
    fn enumerate_prefixed_examples() {
        let r2 = rank(2);
        let p: Vec<_> = enumerate_prefixed(r2, &w("a"), 1).unwrap().collect();
        assert_eq!(p, vec![w("a")]);
        let p: Vec<_> = enumerate_prefixed(r2, &w("a"), 2).unwrap().collect();
        let filtered: Vec<_> = enumerate_sphere(r2, 2).filter(|g| g.first() == Some(l("a"))).collect();
        assert_eq!(p, filtered);
        assert_eq!(p.len(), 3);
        assert_eq!(enumerate_prefixed(r2, &w("ab"), 4).unwrap().count(), 9);
        assert!(enumerate_prefixed(r2, &w("ab"), 1).is_err());
        assert!(enumerate_prefixed(r2, &ReducedWord::identity(), 2).is_err());
    }

    #[test]
    fn count_avoiding_examples() {
        let r2 = rank(2);
        for s in r2.letters() {
            for t in r2.letters() {
                assert_eq!(count_avoiding(r2, 0, s, t).unwrap(), BigUint::from(1u32));
            }
        }
        assert_eq!(count_avoiding(r2, 2, l("a"), l("b")).unwrap(), BigUint::from(7u32));
        assert_eq!(count_avoiding(r2, 1, l("a"), l("a")).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn residue_zero_needs_the_length_four_anchor() {
        // t = s^-1 is where anchoring the closed form at j = 0 goes wrong:
        // 108 - 2*27 + |S_2(A, a)| = 54 + 6 = 60 by inclusion-exclusion.
        let r2 = rank(2);
        assert_eq!(brute_avoiding(r2, 4, l("a"), l("A")), 60);
        assert_eq!(count_avoiding(r2, 4, l("a"), l("A")).unwrap(), BigUint::from(60u32));
        let brute = brute_avoiding(r2, 8, l("a"), l("A"));
        assert_eq!(count_avoiding(r2, 8, l("a"), l("A")).unwrap(), BigUint::from(brute));
        let anchored_at_zero = 3 * (3u64.pow(8) - 1) / 4 + 1;
        assert_eq!(anchored_at_zero, brute + 1);
    }

    #[test]
    fn count_avoiding_matches_enumeration() {
        for r in [2, 3] {
            let rk = rank(r);
            let max_m = if r == 2 { 10 } else { 8 };
            for m in 0..=max_m {
                for s in rk.letters() {
                    for t in rk.letters() {
                        assert_eq!(
                            count_avoiding(rk, m, s, t).unwrap(),
                            BigUint::from(brute_avoiding(rk, m, s, t)),
                            "r={r} m={m} s={s:?} t={t:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn inclusion_exclusion() {
        let rk = rank(2);
        for m in 3..=10 {
            for s in rk.letters() {
                for t in rk.letters() {
                    let total = sphere_count(rk, m);
                    let starts = enumerate_sphere(rk, m).filter(|g| g.first() == Some(s)).count();
                    let ends = enumerate_sphere(rk, m).filter(|g| g.last() == Some(t)).count();
                    let both = count_avoiding(rk, m - 2, s.inverse(), t.inverse()).unwrap();
                    let lhs = count_avoiding(rk, m, s, t).unwrap() + BigUint::from(starts + ends);
                    assert_eq!(lhs, total + both);
                }
            }
        }
    }

    #[test]
    fn prefix_suffix_examples() {
        let r2 = rank(2);
        assert_eq!(count_prefix_suffix(r2, 3, &w("a"), &w("a")).unwrap(), BigUint::from(2u32));
        assert_eq!(count_prefix_suffix(r2, 2, &w("a"), &w("B")).unwrap(), BigUint::from(1u32));
        assert!(count_prefix_suffix(r2, 3, &ReducedWord::identity(), &w("a")).is_err());
        assert_eq!(count_prefix_suffix(r2, 1, &w("ab"), &w("a")).unwrap(), BigUint::zero());
    }

    #[test]
    fn prefix_suffix_fast_path_matches_enumeration() {
        let r2 = rank(2);
        let words: Vec<_> = (1..=2).flat_map(|k| enumerate_sphere(r2, k)).collect();
        for n in 0..=8 {
            for u in &words {
                for v in &words {
                    assert_eq!(
                        count_prefix_suffix(r2, n, u, v).unwrap(),
                        count_prefix_suffix_enumerated(r2, n, u, v).unwrap(),
                        "n={n} u={u} v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn swap_symmetry() {
        // gamma -> gamma^-1 maps S_n^{u,v} onto S_n^{v,u}
        let r2 = rank(2);
        let words: Vec<_> = (1..=2).flat_map(|k| enumerate_sphere(r2, k)).collect();
        for n in 1..=10 {
            for u in &words {
                for v in &words {
                    assert_eq!(
                        count_prefix_suffix(r2, n, u, v).unwrap(),
                        count_prefix_suffix(r2, n, v, u).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn ratio_approaches_product_measure() {
        let r2 = rank(2);
        let c = count_prefix_suffix(r2, 30, &w("a"), &w("b")).unwrap();
        let s = sphere_count(r2, 30);
        let ratio = c.to_f64().unwrap() / s.to_f64().unwrap();
        assert!((ratio - 1.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn histogram_agrees_with_direct_counts() {
        let r2 = rank(2);
        let h = prefix_suffix_histogram(r2, 5, 2, 1).unwrap();
        assert_eq!(h.total(), 324);
        for u in enumerate_sphere(r2, 2) {
            for s in enumerate_sphere(r2, 1) {
                let direct = count_prefix_suffix_enumerated(r2, 5, &u, &s.inverse()).unwrap();
                assert_eq!(BigUint::from(h.get(&u, &s)), direct);
            }
        }
    }
}
