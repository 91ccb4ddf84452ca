//! The quasi-regular representation `pi` on step functions, exact inner
//! products, and the Harish-Chandra function `Xi`.
//!
//! On a cylinder whose label shares exactly `p` letters with `gamma`,
//! `P(gamma, .)^(1/2) = q^(p - n/2)` with `n = |gamma|` and `q = 2r - 1`.
//! Most routines here work with the integer weights `q^p` and restore the
//! common factor `q^(-n/2)` at the end.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use crate::boundary::{
    poisson_sqrt, translated_prefix, BoundaryMeasureContext, Cylinder, StepFunction,
};
use crate::error::{Error, Result};
use crate::exact::{half_power, integerize, QuadExt, Rational, ZSqrt};
use crate::word::{common_prefix_len, enumerate_sphere, Codes, Rank, ReducedWord, SphereIndex};

/// `Xi(n) = (1 + (r-1) n / r) q^(-n/2)`.
pub fn xi_closed(rank: Rank, n: usize) -> QuadExt {
    half_power(rank.q(), -(n as i64)).scale(&xi_polynomial(rank, n))
}

/// `1 + (r-1) n / r`, so that `Xi(n) = xi_polynomial(n) q^(-n/2)`.
pub fn xi_polynomial(rank: Rank, n: usize) -> Rational {
    let r = BigInt::from(rank.get());
    Rational::new(&r + (&r - 1) * BigInt::from(n), r)
}

/// Number of letters that may follow `prev` in a reduced word, other than `skip`.
fn alternatives(rank: Rank, prev: Option<u16>, skip: u16) -> usize {
    let forbidden = prev.map(|c| rank.inv_code(c));
    (0..rank.alphabet_len() as u16)
        .filter(|&t| t != skip && Some(t) != forbidden)
        .count()
}

/// Ratio `<pi(gamma) 1_B, 1_{B_w}> / Xi(gamma)` and its product with `|gamma|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarishRatio {
    pub ratio: QuadExt,
    pub times_length: QuadExt,
}

/// `q^p` weights of `P(gamma, .)^(1/2) q^(n/2)` over the cylinders of one
/// depth, with prefix sums so that integrals over any coarser cylinder are O(1).
#[derive(Clone, Debug)]
pub struct PoissonProfile {
    rank: Rank,
    gamma_len: usize,
    index: SphereIndex,
    prefix: Vec<u128>,
}

impl PoissonProfile {
    pub fn new(rank: Rank, gamma: &ReducedWord, depth: usize) -> Result<Self> {
        rank.check_word(gamma)?;
        let n = gamma.len();
        if depth < n {
            return Err(Error::TooShallow {
                depth,
                gamma_len: n,
            });
        }
        let index = SphereIndex::new(rank, depth)?;
        let g = rank.codes(gamma);
        let q = rank.q() as u128;
        // q^p = 1 + sum_{j <= p} (q^j - q^(j-1)), one range update per level
        let mut diff = vec![0u128; index.len() + 1];
        diff[0] = 1;
        let mut qj = 1u128;
        for j in 1..=n {
            let step = qj * (q - 1);
            qj *= q;
            let range = index.prefix_range_codes(&g[..j]);
            diff[range.start] += step;
            diff[range.end] = diff[range.end].wrapping_sub(step);
        }
        let mut prefix = Vec::with_capacity(index.len() + 1);
        prefix.push(0u128);
        let (mut level, mut total) = (0u128, 0u128);
        for d in &diff[..index.len()] {
            level = level.wrapping_add(*d);
            total = total.checked_add(level).ok_or(Error::Overflow)?;
            prefix.push(total);
        }
        Ok(PoissonProfile {
            rank,
            gamma_len: n,
            index,
            prefix,
        })
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    /// `sum of q^p` over the depth cylinders inside `B_u`.
    pub fn weight_sum(&self, u: &ReducedWord) -> u128 {
        let range = self.index.prefix_range(u);
        self.prefix[range.end] - self.prefix[range.start]
    }

    /// `<pi(gamma) 1_B, 1_{B_u}>` for `|u| <= depth`.
    pub fn integral(&self, u: &ReducedWord) -> QuadExt {
        let mu = BoundaryMeasureContext::new(self.rank).depth_measure(self.depth());
        let s = Rational::from_integer(BigInt::from(self.weight_sum(u)));
        half_power(self.rank.q(), -(self.gamma_len as i64)).scale(&(s * mu))
    }
}

/// Outcome of integrating `P(gamma, .)^(1/2)` for every `gamma` up to a length.
#[derive(Clone, Debug)]
pub struct XiScan {
    pub rank: Rank,
    pub max_len: usize,
    /// For each length `n`, how many `gamma` produced each block weight `W`,
    /// where the integral is `W q^(-n/2) / (2r)`.
    pub weights: Vec<BTreeMap<u64, u64>>,
}

impl XiScan {
    pub fn words(&self) -> u64 {
        self.weights.iter().flat_map(|m| m.values()).sum()
    }

    /// The exact integral for each distinct weight at length `n`.
    pub fn values(&self, n: usize) -> Vec<(QuadExt, u64)> {
        let two_r = BigInt::from(self.rank.alphabet_len());
        self.weights[n]
            .iter()
            .map(|(&w, &count)| {
                let scale = Rational::new(BigInt::from(w), two_r.clone());
                (half_power(self.rank.q(), -(n as i64)).scale(&scale), count)
            })
            .collect()
    }

    /// Lengths at which some `gamma` disagrees with the closed form.
    pub fn mismatches(&self) -> Vec<usize> {
        (0..=self.max_len)
            .filter(|&n| {
                let closed = xi_closed(self.rank, n);
                self.values(n).iter().any(|(v, _)| *v != closed)
            })
            .collect()
    }
}

/// Integrates `P(gamma, .)^(1/2)` by its prefix-block decomposition for every
/// `gamma` with `|gamma| <= max_len`, in one traversal of the ball.
///
/// The block of boundary points leaving `gamma` after `p` letters has weight
/// equal to the number of letters that branch off there; `B_gamma` itself adds `q`.
pub fn xi_scan(rank: Rank, max_len: usize) -> XiScan {
    let q = rank.q();
    let top = rank.alphabet_len() as u16;
    let root_branch = alternatives(rank, None, u16::MAX) as u64 - 1;
    let mut weights: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); max_len + 1];
    // the identity's only block is the whole boundary, of measure 1
    weights[0].insert(rank.alphabet_len() as u64, 1);
    if max_len == 0 {
        return XiScan {
            rank,
            max_len,
            weights,
        };
    }
    let parts: Vec<Vec<BTreeMap<u64, u64>>> = (0..top)
        .into_par_iter()
        .map(|first| {
            let mut local: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); max_len + 1];
            // stack of (last letter, depth, partial weight)
            let mut stack = vec![(first, 1usize, root_branch)];
            while let Some((last, depth, w)) = stack.pop() {
                *local[depth].entry(w + q).or_insert(0) += 1;
                if depth == max_len {
                    continue;
                }
                let forbidden = rank.inv_code(last);
                let children = alternatives(rank, Some(last), u16::MAX) as u64;
                for t in (0..top).filter(|&t| t != forbidden) {
                    stack.push((t, depth + 1, w + children - 1));
                }
            }
            local
        })
        .collect();
    for part in parts {
        for (n, m) in part.into_iter().enumerate() {
            for (w, c) in m {
                *weights[n].entry(w).or_insert(0) += c;
            }
        }
    }
    XiScan {
        rank,
        max_len,
        weights,
    }
}

/// Exact operations on step functions for a fixed rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepContext {
    rank: Rank,
    measure: BoundaryMeasureContext,
}

impl RepContext {
    pub fn new(rank: Rank) -> Self {
        RepContext {
            rank,
            measure: BoundaryMeasureContext::new(rank),
        }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn measure(&self) -> &BoundaryMeasureContext {
        &self.measure
    }

    fn check(&self, f: &StepFunction) -> Result<()> {
        if f.rank() == self.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank.get(), f.rank().get()))
        }
    }

    /// `(pi(gamma) g)(xi) = P(gamma, xi)^(1/2) g(gamma^-1 xi)` at depth `|gamma| + depth(g)`.
    pub fn apply_pi(&self, gamma: &ReducedWord, g: &StepFunction) -> Result<StepFunction> {
        self.check(g)?;
        self.rank.check_word(gamma)?;
        let rank = self.rank;
        let n = gamma.len();
        let d = g.depth();
        let out = SphereIndex::new(rank, n + d)?;
        let src = g.index();
        let powers: Vec<QuadExt> = (0..=n)
            .map(|p| half_power(rank.q(), 2 * p as i64 - n as i64))
            .collect();
        let gc = rank.codes(gamma);
        let mut c: Codes = Vec::with_capacity(n + d);
        let mut t: Codes = Vec::with_capacity(d);
        let values = (0..out.len())
            .map(|i| {
                out.codes_at(i, &mut c);
                let p = gc.iter().zip(&c).take_while(|(x, y)| x == y).count();
                translated_prefix(rank, &gc, &c, d, &mut t);
                &powers[p] * &g.values()[src.index_of_codes(&t)]
            })
            .collect();
        StepFunction::new(rank, n + d, values)
    }

    /// `<g, h> = integral of g h dmu`, exact.
    pub fn inner(&self, g: &StepFunction, h: &StepFunction) -> Result<QuadExt> {
        self.check(g)?;
        self.check(h)?;
        let (x, y) = g.align(h)?;
        let mu = self.measure.depth_measure(x.depth());
        let q = self.rank.q();
        if let Ok(v) = integer_dot(x.values(), y.values(), q) {
            return Ok(v.scale(&mu));
        }
        let mut acc = QuadExt::zero(q);
        for (a, b) in x.values().iter().zip(y.values()) {
            acc = acc + a * b;
        }
        Ok(acc.scale(&mu))
    }

    pub fn norm_squared(&self, g: &StepFunction) -> Result<QuadExt> {
        self.inner(g, g)
    }

    pub fn xi_closed(&self, n: usize) -> QuadExt {
        xi_closed(self.rank, n)
    }

    /// `Xi(gamma) = <pi(gamma) 1_B, 1_B>` by the prefix-block decomposition at
    /// depth `|gamma|`: the depth-`n` cylinders leaving `gamma` after exactly
    /// `p` letters all carry `q^(p - n/2)`.
    pub fn xi_integral(&self, gamma: &ReducedWord) -> Result<QuadExt> {
        self.rank.check_word(gamma)?;
        let n = gamma.len();
        let q = self.rank.q();
        let g = self.rank.codes(gamma);
        let mu = self.measure.depth_measure(n);
        let mut acc = QuadExt::zero(q);
        for p in 0..=n {
            let cells = if p == n {
                BigInt::one()
            } else {
                let prev = if p == 0 { None } else { Some(g[p - 1]) };
                BigInt::from(alternatives(self.rank, prev, g[p]))
                    * num_traits::pow(BigInt::from(q), n - 1 - p)
            };
            let block = Rational::from_integer(cells) * &mu;
            acc = acc + half_power(q, 2 * p as i64 - n as i64).scale(&block);
        }
        Ok(acc)
    }

    /// `Xi(gamma)` as the literal inner product on the full depth-`|gamma|` partition.
    pub fn xi_integral_dense(&self, gamma: &ReducedWord) -> Result<QuadExt> {
        let one = StepFunction::one(self.rank);
        self.inner(&self.apply_pi(gamma, &one)?, &one)
    }

    /// `<pi(gamma) 1_B, 1_{B_u}>`, by closed forms.
    ///
    /// With `p` the common prefix length, `n = |gamma|` and `m = |u|`:
    /// * `u` branches off `gamma` (`p < min(n, m)`): `mu(B_u) q^(p - n/2)`;
    /// * `u` extends or equals `gamma`: `mu(B_u) q^(n/2)`;
    /// * `u` a strict prefix of `gamma`: `q^(-n/2) ((n - m)(2r - 2) + q) / (2r)`,
    ///   summing the blocks that leave `gamma` at or after position `m`.
    ///
    /// The whole boundary gives `Xi(n)`.
    pub fn coeff_cylinder(&self, gamma: &ReducedWord, c: &Cylinder) -> Result<QuadExt> {
        self.rank.check_word(gamma)?;
        let u = c.word();
        self.rank.check_word(&u)?;
        let (n, m) = (gamma.len(), u.len());
        let q = self.rank.q();
        if m == 0 {
            return Ok(self.xi_closed(n));
        }
        let p = common_prefix_len(gamma, &u);
        let mu = self.measure.depth_measure(m);
        if p < n.min(m) {
            return Ok(half_power(q, 2 * p as i64 - n as i64).scale(&mu));
        }
        if p == n {
            return Ok(half_power(q, n as i64).scale(&mu));
        }
        let branch = 2 * (self.rank.get() as i64 - 1);
        let w = BigInt::from((n - m) as i64 * branch + q as i64);
        let scale = Rational::new(w, BigInt::from(self.rank.alphabet_len()));
        Ok(half_power(q, -(n as i64)).scale(&scale))
    }

    /// `<pi(gamma) 1_B, 1_{B_u}>` by summing over the cylinders of depth
    /// `max(|gamma|, |u|)` inside `B_u`.
    pub fn coeff_cylinder_integrated(&self, gamma: &ReducedWord, c: &Cylinder) -> Result<QuadExt> {
        let u = c.word();
        self.rank.check_word(&u)?;
        let depth = gamma.len().max(u.len());
        Ok(PoissonProfile::new(self.rank, gamma, depth)?.integral(&u))
    }

    fn sphere_prefix_histogram(&self, n: usize, c: &Cylinder) -> Result<Vec<BigInt>> {
        let label = c.word();
        self.rank.check_word(&label)?;
        if label.len() < n {
            return Err(Error::TooShallow {
                depth: label.len(),
                gamma_len: n,
            });
        }
        let codes = self.rank.codes(&label);
        let q = BigInt::from(self.rank.q());
        Ok((0..=n)
            .map(|p| {
                if p == n {
                    return BigInt::one();
                }
                let prev = if p == 0 { None } else { Some(codes[p - 1]) };
                BigInt::from(alternatives(self.rank, prev, codes[p]))
                    * num_traits::pow(q.clone(), n - 1 - p)
            })
            .collect())
    }

    /// `sum over gamma in S_n of P(gamma, xi)^(1/2)` for `xi` in `c`, by
    /// counting the `gamma` that share exactly `p` letters with the label.
    pub fn sum_sphere_poisson(&self, n: usize, c: &Cylinder) -> Result<QuadExt> {
        let hist = self.sphere_prefix_histogram(n, c)?;
        let q = self.rank.q();
        let mut acc = QuadExt::zero(q);
        for (p, count) in hist.into_iter().enumerate() {
            acc = acc + half_power(q, 2 * p as i64 - n as i64).scale(&Rational::from_integer(count));
        }
        Ok(acc)
    }

    /// The same sum by enumerating `S_n`.
    pub fn sum_sphere_poisson_enumerated(&self, n: usize, c: &Cylinder) -> Result<QuadExt> {
        if c.depth() < n {
            return Err(Error::TooShallow {
                depth: c.depth(),
                gamma_len: n,
            });
        }
        let q = self.rank.q();
        let mut counts = vec![0u64; 2 * n + 1];
        for gamma in enumerate_sphere(self.rank, n) {
            let beta = crate::boundary::busemann(&gamma, c)?;
            counts[(beta + n as i64) as usize] += 1;
        }
        let mut acc = QuadExt::zero(q);
        for (i, k) in counts.into_iter().enumerate().filter(|(_, k)| *k > 0) {
            let count = Rational::from_integer(BigInt::from(k));
            acc = acc + half_power(q, i as i64 - n as i64).scale(&count);
        }
        Ok(acc)
    }

    /// `<pi(gamma) 1_B, 1_{B_w}> / Xi(gamma)`, for `w` not a prefix of `gamma`.
    pub fn harish_ratio_bound(&self, gamma: &ReducedWord, w: &ReducedWord) -> Result<HarishRatio> {
        if gamma.is_empty() {
            return Err(Error::EmptyWord("the ratio bound needs gamma != e"));
        }
        if w.is_prefix_of(gamma) {
            return Err(Error::PrefixOfGamma(w.pretty()));
        }
        let coeff = self.coeff_cylinder(gamma, &Cylinder::new(w.clone()))?;
        let ratio = coeff.checked_div(&self.xi_closed(gamma.len()))?;
        let times_length = ratio.scale(&Rational::from_integer(BigInt::from(gamma.len())));
        Ok(HarishRatio {
            ratio,
            times_length,
        })
    }

    /// `sup of ratio * |gamma|` over `1 <= |gamma| <= n_max` with `w` not a
    /// prefix of `gamma`. The ratio depends on `gamma` only through its length
    /// and its common prefix with `w`, so one representative per pair is used.
    pub fn harish_constant_empirical(&self, w: &ReducedWord, n_max: usize) -> Result<QuadExt> {
        self.rank.check_word(w)?;
        if w.is_empty() {
            return Err(Error::PrefixOfGamma(w.pretty()));
        }
        let wc = self.rank.codes(w);
        let mut best = QuadExt::zero(self.rank.q());
        for n in 1..=n_max {
            for p in 0..=n.min(w.len()) {
                if p == w.len() {
                    continue;
                }
                let Some(gamma) = representative(self.rank, &wc, p, n) else {
                    continue;
                };
                let r = self.harish_ratio_bound(&gamma, w)?;
                if r.times_length > best {
                    best = r.times_length;
                }
            }
        }
        Ok(best)
    }

    /// `P(gamma, .)^(1/2)` on a cylinder.
    pub fn poisson_sqrt(&self, gamma: &ReducedWord, c: &Cylinder) -> Result<QuadExt> {
        poisson_sqrt(self.rank, gamma, c)
    }
}

/// A word of length `n` sharing exactly `p` letters with `w`; `p <= |w|`.
fn representative(rank: Rank, w: &[u16], p: usize, n: usize) -> Option<ReducedWord> {
    let mut codes: Codes = w[..p.min(n)].to_vec();
    while codes.len() < n {
        let prev = codes.last().map(|&c| rank.inv_code(c));
        let avoid = if codes.len() == p { w.get(p).copied() } else { None };
        let next = (0..rank.alphabet_len() as u16).find(|&t| Some(t) != prev && Some(t) != avoid)?;
        codes.push(next);
    }
    Some(rank.word(&codes))
}

/// `sum x_i y_i` through machine integers; errors on overflow.
fn integer_dot(x: &[QuadExt], y: &[QuadExt], q: u64) -> Result<QuadExt> {
    let (xs, dx) = integerize(x)?;
    let (ys, dy) = integerize(y)?;
    let qi = q as i128;
    let mut acc = ZSqrt::ZERO;
    for (a, b) in xs.iter().zip(&ys) {
        acc = acc.checked_add(a.checked_mul(*b, qi)?)?;
    }
    let den = Rational::new(BigInt::one(), dx * dy);
    Ok(acc.to_quad(&QuadExt::from_rational(den, q)))
}
