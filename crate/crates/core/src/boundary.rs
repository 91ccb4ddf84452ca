//! The boundary `B` of the Cayley tree: cylinders, the visual measure,
//! Gromov products, Busemann cocycles and the Poisson kernel.
//!
//! Boundary points are never materialized. Everything is computed on the
//! coarsest cylinder partition on which the integrand is constant; a
//! [`StepFunction`] is a function constant on the cylinders of one depth.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{half_power, rational_json, parse_rational, QuadExt, Rational};
use crate::word::{common_prefix_len, Codes, Rank, ReducedWord, SphereIndex};

/// A boundary cylinder `B_u`, or the whole boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cylinder {
    Whole,
    Word(ReducedWord),
}

impl Cylinder {
    /// `B_u`, with the identity mapped to the whole boundary.
    pub fn new(u: ReducedWord) -> Self {
        if u.is_empty() {
            Cylinder::Whole
        } else {
            Cylinder::Word(u)
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Cylinder::Whole => 0,
            Cylinder::Word(u) => u.len(),
        }
    }

    /// The label; empty for the whole boundary.
    pub fn word(&self) -> ReducedWord {
        match self {
            Cylinder::Whole => ReducedWord::identity(),
            Cylinder::Word(u) => u.clone(),
        }
    }

    pub fn contains(&self, other: &Cylinder) -> bool {
        self.word().is_prefix_of(&other.word())
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cylinder::Whole => f.write_str("B"),
            Cylinder::Word(u) => f.write_str(&u.pretty()),
        }
    }
}

impl FromStr for Cylinder {
    type Err = Error;

    /// Word syntax, with `B` for the whole boundary. Since `B` is taken, the
    /// cylinder of the single letter `b^-1` must be written `-2`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "B" {
            return Ok(Cylinder::Whole);
        }
        Ok(Cylinder::new(s.parse()?))
    }
}

/// The visual measure `mu` on the boundary of `F_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryMeasureContext {
    rank: Rank,
}

impl BoundaryMeasureContext {
    pub fn new(rank: Rank) -> Self {
        BoundaryMeasureContext { rank }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// The critical exponent `delta = ln(2r - 1)`, kept as `2r - 1`.
    pub fn delta_base(&self) -> u64 {
        self.rank.q()
    }

    pub fn delta(&self) -> f64 {
        (self.rank.q() as f64).ln()
    }

    /// Measure of any single cylinder of depth `d`: `1 / (2r (2r-1)^(d-1))`, and 1 at `d = 0`.
    pub fn depth_measure(&self, d: usize) -> Rational {
        if d == 0 {
            return Rational::one();
        }
        let den = BigInt::from(self.rank.alphabet_len())
            * num_traits::pow(BigInt::from(self.rank.q()), d - 1);
        Rational::new(BigInt::one(), den)
    }

    pub fn cylinder_measure(&self, c: &Cylinder) -> Rational {
        self.depth_measure(c.depth())
    }
}

/// Gromov product of two boundary points known through initial segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GromovProduct {
    pub value: usize,
    /// `false` when the segments agree entirely, so `value` is only a lower bound.
    pub exact: bool,
}

impl GromovProduct {
    /// `e^(-value)`; an upper bound on the distance when not exact.
    pub fn distance(&self) -> f64 {
        (-(self.value as f64)).exp()
    }
}

pub fn gromov_product(u: &ReducedWord, v: &ReducedWord) -> GromovProduct {
    let value = common_prefix_len(u, v);
    GromovProduct {
        value,
        exact: value < u.len().min(v.len()),
    }
}

/// `beta_xi(x0, gamma x0) = 2p - |gamma|` for every `xi` in `c`, where `p` is
/// the common prefix length of `gamma` and the label of `c`.
pub fn busemann(gamma: &ReducedWord, c: &Cylinder) -> Result<i64> {
    let label = c.word();
    let p = common_prefix_len(gamma, &label);
    if p == label.len() && p < gamma.len() {
        return Err(Error::TooShallow {
            depth: label.len(),
            gamma_len: gamma.len(),
        });
    }
    Ok(2 * p as i64 - gamma.len() as i64)
}

/// `P(gamma, xi)^(1/2) = (2r-1)^(beta/2)` on `c`.
pub fn poisson_sqrt(rank: Rank, gamma: &ReducedWord, c: &Cylinder) -> Result<QuadExt> {
    Ok(half_power(rank.q(), busemann(gamma, c)?))
}

/// A function on the boundary, constant on each cylinder of a fixed depth.
///
/// `values[i]` is the value on the `i`-th cylinder of that depth in
/// lexicographic order (see [`SphereIndex`]). Depth 0 is a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    rank: Rank,
    depth: usize,
    values: Vec<QuadExt>,
}

impl StepFunction {
    pub fn new(rank: Rank, depth: usize, values: Vec<QuadExt>) -> Result<Self> {
        let expected = SphereIndex::new(rank, depth)?.len();
        if values.len() != expected {
            return Err(Error::ValueCount {
                got: values.len(),
                expected,
                depth,
            });
        }
        if let Some(v) = values.iter().find(|v| v.radicand() != rank.q()) {
            return Err(Error::RadicandMismatch(v.radicand(), rank.q()));
        }
        Ok(StepFunction {
            rank,
            depth,
            values,
        })
    }

    pub(crate) fn from_parts(rank: Rank, depth: usize, values: Vec<QuadExt>) -> Self {
        debug_assert_eq!(values.len(), SphereIndex::new(rank, depth).unwrap().len());
        StepFunction {
            rank,
            depth,
            values,
        }
    }

    pub fn constant(rank: Rank, c: QuadExt) -> Self {
        StepFunction::from_parts(rank, 0, vec![c])
    }

    /// `1_B`.
    pub fn one(rank: Rank) -> Self {
        Self::constant(rank, QuadExt::one(rank.q()))
    }

    pub fn zero(rank: Rank, depth: usize) -> Result<Self> {
        let n = SphereIndex::new(rank, depth)?.len();
        Ok(StepFunction::from_parts(
            rank,
            depth,
            vec![QuadExt::zero(rank.q()); n],
        ))
    }

    /// `1_{B_u}` at depth `|u|`.
    pub fn indicator(rank: Rank, c: &Cylinder) -> Result<Self> {
        let u = c.word();
        rank.check_word(&u)?;
        let idx = SphereIndex::new(rank, u.len())?;
        let q = rank.q();
        let mut values = vec![QuadExt::zero(q); idx.len()];
        values[idx.index_of(&u)] = QuadExt::one(q);
        Ok(StepFunction::from_parts(rank, u.len(), values))
    }

    pub fn from_fn<F: FnMut(&ReducedWord) -> QuadExt>(
        rank: Rank,
        depth: usize,
        mut f: F,
    ) -> Result<Self> {
        let idx = SphereIndex::new(rank, depth)?;
        let values = (0..idx.len()).map(|i| f(&idx.word_at(i))).collect();
        StepFunction::new(rank, depth, values)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[QuadExt] {
        &self.values
    }

    pub(crate) fn index(&self) -> SphereIndex {
        SphereIndex::new(self.rank, self.depth).expect("validated at construction")
    }

    /// Value on any cylinder whose label has length at least the depth.
    pub fn value_at(&self, w: &ReducedWord) -> &QuadExt {
        assert!(w.len() >= self.depth, "label shorter than the depth");
        let i = self.index().index_of(&w.prefix(self.depth));
        &self.values[i]
    }

    pub fn refine(&self, depth: usize) -> Result<StepFunction> {
        if depth < self.depth {
            return Err(Error::RefineBelowDepth {
                from: self.depth,
                to: depth,
            });
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let fine = SphereIndex::new(self.rank, depth)?;
        let coarse = self.index();
        let mut values = Vec::with_capacity(fine.len());
        let mut buf = Vec::with_capacity(depth);
        for i in 0..fine.len() {
            fine.codes_at(i, &mut buf);
            values.push(self.values[coarse.index_of_codes(&buf[..self.depth])].clone());
        }
        Ok(StepFunction::from_parts(self.rank, depth, values))
    }

    /// Exact `integral over B` of the function against `mu`.
    pub fn integrate(&self) -> QuadExt {
        let mu = BoundaryMeasureContext::new(self.rank).depth_measure(self.depth);
        self.sum().scale(&mu)
    }

    fn sum(&self) -> QuadExt {
        let q = self.rank.q();
        let (mut a, mut b) = (Rational::zero(), Rational::zero());
        for v in &self.values {
            a += v.a();
            b += v.b();
        }
        QuadExt::new(a, b, q)
    }

    fn check_rank(&self, other: &StepFunction) -> Result<()> {
        if self.rank == other.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank.get(), other.rank.get()))
        }
    }

    /// Both functions refined to their common depth.
    pub fn align(&self, other: &StepFunction) -> Result<(StepFunction, StepFunction)> {
        self.check_rank(other)?;
        let d = self.depth.max(other.depth);
        Ok((self.refine(d)?, other.refine(d)?))
    }

    pub fn zip_with<F: Fn(&QuadExt, &QuadExt) -> QuadExt>(
        &self,
        other: &StepFunction,
        f: F,
    ) -> Result<StepFunction> {
        let (x, y) = self.align(other)?;
        let values = x.values.iter().zip(&y.values).map(|(a, b)| f(a, b)).collect();
        Ok(StepFunction::from_parts(x.rank, x.depth, values))
    }

    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, k: &QuadExt) -> StepFunction {
        let values = self.values.iter().map(|v| v * k).collect();
        StepFunction::from_parts(self.rank, self.depth, values)
    }

    pub fn abs(&self) -> StepFunction {
        let values = self.values.iter().map(QuadExt::abs).collect();
        StepFunction::from_parts(self.rank, self.depth, values)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.signum() >= 0)
    }

    /// Equality as functions on `B`, irrespective of representation depth.
    pub fn same_function(&self, other: &StepFunction) -> bool {
        match self.align(other) {
            Ok((x, y)) => x.values == y.values,
            Err(_) => false,
        }
    }

    /// `xi -> f(gamma^-1 xi)` at depth `|gamma| + depth`.
    pub fn translate(&self, gamma: &ReducedWord) -> Result<StepFunction> {
        self.rank.check_word(gamma)?;
        let n = gamma.len();
        let out = SphereIndex::new(self.rank, n + self.depth)?;
        let src = self.index();
        let g = self.rank.codes(gamma);
        let mut c: Codes = Vec::with_capacity(out.len());
        let mut t: Codes = Vec::with_capacity(self.depth);
        let values = (0..out.len())
            .map(|i| {
                out.codes_at(i, &mut c);
                translated_prefix(self.rank, &g, &c, self.depth, &mut t);
                self.values[src.index_of_codes(&t)].clone()
            })
            .collect();
        Ok(StepFunction::from_parts(self.rank, n + self.depth, values))
    }
}

/// First `d` letters of `gamma^-1 c`, where `|c| >= |gamma| + d`.
pub(crate) fn translated_prefix(rank: Rank, gamma: &[u16], c: &[u16], d: usize, out: &mut Codes) {
    let p = gamma.iter().zip(c).take_while(|(x, y)| x == y).count();
    out.clear();
    for &x in gamma[p..].iter().rev() {
        if out.len() == d {
            return;
        }
        out.push(rank.inv_code(x));
    }
    let need = d - out.len();
    out.extend_from_slice(&c[p..p + need]);
}

/// `xi -> f(gamma^-1 xi)`.
pub fn boundary_translate(gamma: &ReducedWord, f: &StepFunction) -> Result<StepFunction> {
    f.translate(gamma)
}

/// `xi -> P(gamma, xi)^(1/2)` at depth `|gamma|`.
pub fn poisson_sqrt_function(rank: Rank, gamma: &ReducedWord) -> Result<StepFunction> {
    rank.check_word(gamma)?;
    let n = gamma.len();
    let q = rank.q();
    let powers: Vec<QuadExt> = (0..=n).map(|p| half_power(q, 2 * p as i64 - n as i64)).collect();
    let idx = SphereIndex::new(rank, n)?;
    let g = rank.codes(gamma);
    let mut buf = Vec::with_capacity(n);
    let values = (0..idx.len())
        .map(|i| {
            idx.codes_at(i, &mut buf);
            let p = g.iter().zip(&buf).take_while(|(x, y)| x == y).count();
            powers[p].clone()
        })
        .collect();
    Ok(StepFunction::from_parts(rank, n, values))
}

/// `mu(gamma^-1 B_u)` for every `u` in `S_d`, in sphere order, by counting the
/// depth-`|gamma| + d` cells that `gamma` moves into each `B_u`.
pub fn translated_cylinder_measures(rank: Rank, gamma: &ReducedWord, d: usize) -> Result<Vec<Rational>> {
    rank.check_word(gamma)?;
    let depth = gamma.len() + d;
    let cells = SphereIndex::new(rank, depth)?;
    let target = SphereIndex::new(rank, d)?;
    let inv = rank.codes(&gamma.inverse());
    let mut counts = vec![0u64; target.len()];
    let mut c: Codes = Vec::with_capacity(depth);
    let mut t: Codes = Vec::with_capacity(d);
    for i in 0..cells.len() {
        cells.codes_at(i, &mut c);
        translated_prefix(rank, &inv, &c, d, &mut t);
        counts[target.index_of_codes(&t)] += 1;
    }
    let mu = BoundaryMeasureContext::new(rank).depth_measure(depth);
    Ok(counts.into_iter().map(|k| &mu * Rational::from_integer(k.into())).collect())
}

/// `integral over B_u of P(gamma, .)` for every `u` in `S_d`, in sphere order,
/// from the Busemann values on cylinders of depth `max(|gamma|, d)`.
pub fn poisson_cylinder_integrals(rank: Rank, gamma: &ReducedWord, d: usize) -> Result<Vec<Rational>> {
    rank.check_word(gamma)?;
    let n = gamma.len();
    let depth = n.max(d);
    let cells = SphereIndex::new(rank, depth)?;
    let target = SphereIndex::new(rank, d)?;
    let q = BigInt::from(rank.q());
    let mut sums = vec![BigInt::zero(); target.len()];
    let mut c: Codes = Vec::with_capacity(depth);
    for i in 0..cells.len() {
        cells.codes_at(i, &mut c);
        let beta = busemann(gamma, &Cylinder::new(rank.word(&c)))?;
        // P = q^beta; shift by q^n to stay integral
        let w = num_traits::pow(q.clone(), (beta + n as i64) as usize);
        sums[target.index_of_codes(&c[..d])] += w;
    }
    let scale = BoundaryMeasureContext::new(rank).depth_measure(depth)
        / Rational::from_integer(num_traits::pow(q, n));
    Ok(sums.into_iter().map(|k| &scale * Rational::from_integer(k)).collect())
}

#[derive(Serialize, Deserialize)]
struct StepValueJson {
    word: String,
    a: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionJson {
    rank: u32,
    depth: usize,
    values: Vec<StepValueJson>,
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let idx = self.index();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| StepValueJson {
                word: idx.word_at(i).to_canonical_string(),
                a: rational_json(v.a()),
                b: rational_json(v.b()),
            })
            .collect();
        StepFunctionJson {
            rank: self.rank.get(),
            depth: self.depth,
            values,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    /// Entries may come in any order; each cylinder of the depth must appear once.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = StepFunctionJson::deserialize(d)?;
        let rank = Rank::new(raw.rank as i64).map_err(D::Error::custom)?;
        let idx = SphereIndex::new(rank, raw.depth).map_err(D::Error::custom)?;
        let mut values: Vec<Option<QuadExt>> = vec![None; idx.len()];
        for entry in raw.values {
            let w: ReducedWord = entry.word.parse().map_err(D::Error::custom)?;
            rank.check_word(&w).map_err(D::Error::custom)?;
            if w.len() != raw.depth {
                return Err(D::Error::custom(format!(
                    "word {w} does not have length {}",
                    raw.depth
                )));
            }
            let a = parse_rational(&entry.a).map_err(D::Error::custom)?;
            let b = parse_rational(&entry.b).map_err(D::Error::custom)?;
            let slot = &mut values[idx.index_of(&w)];
            if slot.is_some() {
                return Err(D::Error::custom(format!("duplicate word {w}")));
            }
            *slot = Some(QuadExt::new(a, b, rank.q()));
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| D::Error::custom(format!("missing word {}", idx.word_at(i)))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(StepFunction::from_parts(rank, raw.depth, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::word::enumerate_sphere;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn cyl(s: &str) -> Cylinder {
        s.parse().unwrap()
    }

    #[test]
    fn cylinder_measures() {
        let ctx = BoundaryMeasureContext::new(r2());
        assert_eq!(ctx.cylinder_measure(&cyl("a")), rat(1, 4));
        assert_eq!(ctx.cylinder_measure(&cyl("ab")), rat(1, 12));
        assert_eq!(ctx.cylinder_measure(&Cylinder::Whole), rat(1, 1));
    }

    #[test]
    fn measures_partition_unity_and_are_additive() {
        for r in [2, 3] {
            let rank = Rank::new(r).unwrap();
            let ctx = BoundaryMeasureContext::new(rank);
            for d in 0..=6 {
                let n = SphereIndex::new(rank, d).unwrap().len();
                assert_eq!(ctx.depth_measure(d) * Rational::from_integer(n.into()), Rational::one());
            }
            for u in enumerate_sphere(rank, 3) {
                let parent = ctx.cylinder_measure(&Cylinder::new(u.clone()));
                let children: Rational = rank
                    .letters()
                    .filter(|l| Some(l.inverse()) != u.last())
                    .map(|l| {
                        let mut c = u.clone();
                        c.push(l).unwrap();
                        ctx.cylinder_measure(&Cylinder::new(c))
                    })
                    .sum();
                assert_eq!(parent, children);
            }
        }
    }

    #[test]
    fn gromov_examples() {
        let g = gromov_product(&w("abab"), &w("abba"));
        assert_eq!(g, GromovProduct { value: 2, exact: true });
        assert!((g.distance() - (-2f64).exp()).abs() < 1e-15);
        let g = gromov_product(&w("ab"), &w("ba"));
        assert_eq!(g.value, 0);
        assert_eq!(g.distance(), 1.0);
        let g = gromov_product(&w("abab"), &w("abab"));
        assert_eq!(g, GromovProduct { value: 4, exact: false });
    }

    #[test]
    fn busemann_examples() {
        assert_eq!(busemann(&w("ab"), &cyl("ab")).unwrap(), 2);
        assert_eq!(busemann(&w("ab"), &cyl("b")).unwrap(), -2);
        assert_eq!(busemann(&ReducedWord::identity(), &cyl("aB")).unwrap(), 0);
        assert_eq!(busemann(&ReducedWord::identity(), &Cylinder::Whole).unwrap(), 0);
        assert!(matches!(
            busemann(&w("ab"), &cyl("a")),
            Err(Error::TooShallow { .. })
        ));
        assert!(busemann(&w("ab"), &Cylinder::Whole).is_err());
    }

    #[test]
    fn poisson_examples() {
        let r = r2();
        assert_eq!(poisson_sqrt(r, &w("ab"), &cyl("ab")).unwrap(), QuadExt::from_int(3, 3));
        assert_eq!(poisson_sqrt(r, &w("a"), &cyl("a")).unwrap(), QuadExt::sqrt(3));
        assert_eq!(
            poisson_sqrt(r, &w("a"), &cyl("b")).unwrap(),
            QuadExt::new(rat(0, 1), rat(1, 3), 3)
        );
    }

    #[test]
    fn busemann_is_bounded_by_length() {
        let r = r2();
        for n in 0..=4 {
            for g in enumerate_sphere(r, n) {
                for c in enumerate_sphere(r, 4) {
                    let b = busemann(&g, &Cylinder::new(c)).unwrap();
                    assert!(b.unsigned_abs() as usize <= g.len());
                }
            }
        }
    }

    #[test]
    fn refine_examples() {
        let r = r2();
        let one = StepFunction::one(r);
        let fine = one.refine(2).unwrap();
        assert_eq!(fine.values().len(), 12);
        assert!(fine.values().iter().all(QuadExt::is_one));
        assert_eq!(one.refine(0).unwrap(), one);
        let f = StepFunction::indicator(r, &cyl("aB")).unwrap();
        assert_eq!(f.refine(4).unwrap().integrate(), f.integrate());
        assert!(matches!(f.refine(1), Err(Error::RefineBelowDepth { .. })));
    }

    #[test]
    fn integrate_examples() {
        let r = r2();
        assert!(StepFunction::one(r).integrate().is_one());
        let f = StepFunction::indicator(r, &cyl("a")).unwrap();
        assert_eq!(f.integrate(), QuadExt::from_rational(rat(1, 4), 3));
    }

    #[test]
    fn translate_examples() {
        let r = r2();
        let f = StepFunction::indicator(r, &cyl("a")).unwrap();
        assert_eq!(f.translate(&ReducedWord::identity()).unwrap(), f);
        let moved = f.translate(&w("a")).unwrap();
        let expected = StepFunction::indicator(r, &cyl("aa")).unwrap();
        assert!(moved.same_function(&expected));
    }

    #[test]
    fn translated_prefix_matches_word_product() {
        let r = r2();
        for n in 0..=3 {
            for g in enumerate_sphere(r, n) {
                for c in enumerate_sphere(r, n + 2) {
                    let mut out = Vec::new();
                    translated_prefix(r, &r.codes(&g), &r.codes(&c), 2, &mut out);
                    let prod = g.inverse().multiply(&c);
                    assert_eq!(r.word(&out), prod.prefix(2));
                }
            }
        }
    }

    #[test]
    fn quasi_invariance_tables() {
        let r = r2();
        let a_index = SphereIndex::new(r, 1).unwrap().index_of(&w("a"));
        let lhs = translated_cylinder_measures(r, &w("a"), 1).unwrap();
        let rhs = poisson_cylinder_integrals(r, &w("a"), 1).unwrap();
        assert_eq!(lhs[a_index], rat(3, 4));
        assert_eq!(rhs[a_index], rat(3, 4));
        let lhs = translated_cylinder_measures(r, &w("A"), 1).unwrap();
        assert_eq!(lhs[a_index], rat(1, 12));
        assert_eq!(lhs, poisson_cylinder_integrals(r, &w("A"), 1).unwrap());
        for g in enumerate_sphere(r, 3) {
            for d in 0..=2 {
                let lhs = translated_cylinder_measures(r, &g, d).unwrap();
                assert_eq!(lhs.iter().sum::<Rational>(), rat(1, 1));
                assert_eq!(lhs, poisson_cylinder_integrals(r, &g, d).unwrap());
            }
        }
    }

    #[test]
    fn step_function_json_roundtrip() {
        let r = r2();
        let f = poisson_sqrt_function(r, &w("a")).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: StepFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rank"], 2);
        assert_eq!(v["values"][2]["word"], "1");
        let bad = r#"{"rank":2,"depth":1,"values":[{"word":"1","a":"1","b":"0"}]}"#;
        assert!(serde_json::from_str::<StepFunction>(bad).is_err());
    }

    #[test]
    fn constructor_validates_length() {
        let r = r2();
        let e = StepFunction::new(r, 1, vec![QuadExt::one(3)]);
        assert!(matches!(e, Err(Error::ValueCount { .. })));
        let e = StepFunction::new(r, 0, vec![QuadExt::one(5)]);
        assert!(matches!(e, Err(Error::RadicandMismatch(5, 3))));
    }
}
