//! The averaging operators
//! `M_n(f) g = |S_n|^-1 sum_{gamma in S_n} f(gamma) pi(gamma) g / Xi(gamma)`,
//! their limit `M(f) = m(f|_B) P_{1_B}`, and the `chi_u` function algebra.
//!
//! Since `Xi(gamma) = xi_polynomial(n) q^(-n/2)`, the `q^(-n/2)` factors cancel
//! and every sum below runs in `Z[sqrt q]` with a single rational prefactor.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::boundary::{BoundaryMeasureContext, Cylinder, StepFunction};
use crate::error::{Error, Result};
use crate::exact::{format_rational, integerize, matrix_rank, parse_rational, QuadExt, Rational, ZSqrt};
use crate::representation::{xi_closed, xi_polynomial, RepContext};
use crate::word::{
    count_prefix_suffix, enumerate_sphere, fold_words, sphere_count, sphere_len, Codes, Rank,
    ReducedWord, SphereIndex,
};

/// Upper and lower tolerance on compression norms.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Default bound on the dimension of dense matrices.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// A function on the vertices of the tree, together with its boundary values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexFunction {
    Constant(Rational),
    ChiCylinder(ReducedWord),
    /// Finitely many nonzero vertex values; zero on the boundary.
    FiniteSupport(BTreeMap<ReducedWord, Rational>),
}

impl VertexFunction {
    pub fn constant(c: i64) -> Self {
        VertexFunction::Constant(Rational::from_integer(c.into()))
    }

    pub fn chi(u: ReducedWord) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::EmptyWord("chi_u needs a nonempty u"));
        }
        Ok(VertexFunction::ChiCylinder(u))
    }

    /// Value at the vertex `gamma x0`.
    pub fn chi_eval(&self, gamma: &ReducedWord) -> Rational {
        match self {
            VertexFunction::Constant(c) => c.clone(),
            VertexFunction::ChiCylinder(u) => {
                if u.is_prefix_of(gamma) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            VertexFunction::FiniteSupport(t) => t.get(gamma).cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// The restriction `f|_B` as a step function.
    pub fn chi_boundary(&self, rank: Rank) -> Result<StepFunction> {
        let q = rank.q();
        match self {
            VertexFunction::Constant(c) => Ok(StepFunction::constant(
                rank,
                QuadExt::from_rational(c.clone(), q),
            )),
            VertexFunction::ChiCylinder(u) => StepFunction::indicator(rank, &Cylinder::new(u.clone())),
            VertexFunction::FiniteSupport(_) => Ok(StepFunction::constant(rank, QuadExt::zero(q))),
        }
    }

    /// The values on `S_n` as a finite table.
    pub fn tabulate(&self, rank: Rank, n: usize) -> VertexFunction {
        let table = enumerate_sphere(rank, n)
            .map(|g| {
                let v = self.chi_eval(&g);
                (g, v)
            })
            .filter(|(_, v)| !v.is_zero())
            .collect();
        VertexFunction::FiniteSupport(table)
    }

    /// Parses lines `WORD RATIONAL`; blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str, rank: Rank) -> Result<VertexFunction> {
        let mut table = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("table line {}: expected `WORD RATIONAL`", i + 1)));
            };
            let word = if word == "e" { "" } else { word };
            let w = crate::word::parse_word(word, rank)?;
            let v = parse_rational(value)?;
            if table.insert(w.clone(), v).is_some() {
                return Err(Error::Parse(format!("table line {}: duplicate word {}", i + 1, w.pretty())));
            }
        }
        Ok(VertexFunction::FiniteSupport(table))
    }

    pub(crate) fn check_rank(&self, rank: Rank) -> Result<()> {
        match self {
            VertexFunction::Constant(_) => Ok(()),
            VertexFunction::ChiCylinder(u) => rank.check_word(u),
            VertexFunction::FiniteSupport(t) => t.keys().try_for_each(|w| rank.check_word(w)),
        }
    }

    fn is_nonnegative(&self) -> bool {
        match self {
            VertexFunction::Constant(c) => !c.is_negative(),
            VertexFunction::ChiCylinder(_) => true,
            VertexFunction::FiniteSupport(t) => t.values().all(|v| !v.is_negative()),
        }
    }
}

impl fmt::Display for VertexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexFunction::Constant(c) => write!(f, "const:{}", format_rational(c)),
            VertexFunction::ChiCylinder(u) => write!(f, "chi:{}", u.pretty()),
            VertexFunction::FiniteSupport(t) => write!(f, "table[{} entries]", t.len()),
        }
    }
}

/// `f` on `S_n` as integers over a common denominator.
pub(crate) struct SphereEval {
    kind: EvalKind,
    pub(crate) den: BigInt,
}

enum EvalKind {
    Const(i128),
    Prefix(Codes),
    Table(HashMap<Codes, i128>),
}

impl SphereEval {
    pub(crate) fn new(rank: Rank, f: &VertexFunction, n: usize) -> Result<Self> {
        f.check_rank(rank)?;
        Ok(match f {
            VertexFunction::Constant(c) => {
                let (nums, den) = crate::exact::integerize_rationals(std::slice::from_ref(c))?;
                SphereEval {
                    kind: EvalKind::Const(nums[0]),
                    den,
                }
            }
            VertexFunction::ChiCylinder(u) => SphereEval {
                kind: EvalKind::Prefix(rank.codes(u)),
                den: BigInt::one(),
            },
            VertexFunction::FiniteSupport(t) => {
                let entries: Vec<(&ReducedWord, &Rational)> =
                    t.iter().filter(|(w, v)| w.len() == n && !v.is_zero()).collect();
                let values: Vec<Rational> = entries.iter().map(|(_, v)| (*v).clone()).collect();
                let (nums, den) = crate::exact::integerize_rationals(&values)?;
                let map = entries
                    .iter()
                    .zip(nums)
                    .map(|((w, _), k)| (rank.codes(w), k))
                    .collect();
                SphereEval {
                    kind: EvalKind::Table(map),
                    den,
                }
            }
        })
    }

    pub(crate) fn eval(&self, codes: &[u16]) -> i128 {
        match &self.kind {
            EvalKind::Const(c) => *c,
            EvalKind::Prefix(u) => i128::from(codes.starts_with(u)),
            EvalKind::Table(t) => t.get(codes).copied().unwrap_or(0),
        }
    }

    fn vanishes(&self) -> bool {
        match &self.kind {
            EvalKind::Const(c) => *c == 0,
            EvalKind::Prefix(_) => false,
            EvalKind::Table(t) => t.is_empty(),
        }
    }

    /// Prefix length the value depends on, if it depends on a prefix only.
    fn prefix_len(&self) -> Option<usize> {
        match &self.kind {
            EvalKind::Const(_) => Some(0),
            EvalKind::Prefix(u) => Some(u.len()),
            EvalKind::Table(_) => None,
        }
    }
}

fn powers(q: i128, count: usize) -> Result<Vec<i128>> {
    let mut out = Vec::with_capacity(count);
    let mut p = 1i128;
    for i in 0..count {
        out.push(p);
        if i + 1 < count {
            p = p.checked_mul(q).ok_or(Error::Overflow)?;
        }
    }
    Ok(out)
}

/// `r / ((r + (r-1) n) |S_n|)`: the `1 / (|S_n| Xi(n))` normalization with `q^(n/2)` removed.
fn average_prefactor(rank: Rank, n: usize) -> Rational {
    let s = Rational::from_integer(BigInt::from(sphere_count(rank, n)));
    (xi_polynomial(rank, n) * s).recip()
}

fn ensure_sphere(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroSphere)
    } else {
        Ok(())
    }
}

/// Sum over `S_n` of `f(gamma) q^(n/2) pi(gamma) g`, as integers, before the
/// common factor `1 / (den_f den_g)`.
fn m_n_apply_raw(
    rank: Rank,
    f: &SphereEval,
    n: usize,
    g: &[ZSqrt],
    g_index: &SphereIndex,
) -> Result<(Vec<ZSqrt>, SphereIndex)> {
    let d = g_index.depth();
    let out = SphereIndex::new(rank, n + d)?;
    let len = out.len();
    let qi = rank.q() as i128;
    let qpow = powers(qi, n + 1)?;
    type Acc = Result<(Vec<ZSqrt>, Vec<ZSqrt>)>;
    let identity = || -> Acc { Ok((vec![ZSqrt::ZERO; len + 1], vec![ZSqrt::ZERO; len])) };
    let fold = |acc: Acc, gc: &[u16]| -> Acc {
        let (mut diff, mut point) = acc?;
        let fv = f.eval(gc);
        if fv == 0 {
            return Ok((diff, point));
        }
        let mut add_range = |range: std::ops::Range<usize>, k: ZSqrt| -> Result<()> {
            diff[range.start] = diff[range.start].checked_add(k)?;
            diff[range.end] = diff[range.end].checked_sub(k)?;
            Ok(())
        };
        let direct = if n >= d {
            // cells leaving gamma within its first n - d letters see g at the
            // first d letters of gamma^-1
            let s = n - d;
            let lead: Codes = gc[s..].iter().rev().map(|&c| rank.inv_code(c)).collect();
            let k = g[g_index.index_of_codes(&lead)].checked_scale(fv)?;
            if !k.is_zero() {
                add_range(0..len, k)?;
                for j in 1..=s {
                    let step = k.checked_scale(qpow[j] - qpow[j - 1])?;
                    add_range(out.prefix_range_codes(&gc[..j]), step)?;
                }
            }
            if d == 0 {
                None
            } else {
                let tail = out.prefix_range_codes(&gc[..s + 1]);
                if !k.is_zero() {
                    add_range(tail.clone(), k.checked_scale(-qpow[s])?)?;
                }
                Some(tail)
            }
        } else {
            Some(0..len)
        };
        if let Some(range) = direct {
            let mut c = Vec::with_capacity(n + d);
            let mut t = Vec::with_capacity(d);
            for i in range {
                out.codes_at(i, &mut c);
                let p = gc.iter().zip(&c).take_while(|(x, y)| x == y).count();
                crate::boundary::translated_prefix(rank, gc, &c, d, &mut t);
                let v = g[g_index.index_of_codes(&t)].checked_scale(fv * qpow[p])?;
                point[i] = point[i].checked_add(v)?;
            }
        }
        Ok((diff, point))
    };
    let reduce = |a: Acc, b: Acc| -> Acc {
        let (mut d1, mut p1) = a?;
        let (d2, p2) = b?;
        for (x, y) in d1.iter_mut().zip(d2) {
            *x = x.checked_add(y)?;
        }
        for (x, y) in p1.iter_mut().zip(p2) {
            *x = x.checked_add(y)?;
        }
        Ok((d1, p1))
    };
    let (diff, point) = fold_words(rank, &[], n, identity, fold, reduce)?;
    let mut level = ZSqrt::ZERO;
    let mut values = Vec::with_capacity(len);
    for (dv, pv) in diff[..len].iter().zip(point) {
        level = level.checked_add(*dv)?;
        values.push(level.checked_add(pv)?);
    }
    Ok((values, out))
}

/// `M_n(f) g` as an exact step function of depth `n + depth(g)`.
pub fn m_n_apply(f: &VertexFunction, n: usize, g: &StepFunction) -> Result<StepFunction> {
    ensure_sphere(n)?;
    let rank = g.rank();
    let eval = SphereEval::new(rank, f, n)?;
    let d = g.depth();
    if eval.vanishes() {
        return StepFunction::zero(rank, n + d);
    }
    let (gi, dg) = integerize(g.values())?;
    let (raw, out) = m_n_apply_raw(rank, &eval, n, &gi, &g.index())?;
    let factor = average_prefactor(rank, n) / Rational::from_integer(eval.den * dg);
    let factor = QuadExt::from_rational(factor, rank.q());
    let values = raw.into_iter().map(|z| z.to_quad(&factor)).collect();
    StepFunction::new(rank, out.depth(), values).inspect(|s| debug_assert_eq!(s.depth(), n + d))
}

/// `q^(n/2) <pi(gamma) g, h>` for `gamma` in `S_n`, evaluated block by block.
///
/// The boundary points leaving `gamma` after exactly `p` letters carry
/// `q^(p - n/2)`; inside that block `g(gamma^-1 xi) h(xi)` is constant on the
/// cylinders of depth `L_p = max(p + 1, depth h, 2p + depth g - n)`.
struct Kernel<'a> {
    rank: Rank,
    n: usize,
    g: &'a [ZSqrt],
    h: &'a [ZSqrt],
    g_index: SphereIndex,
    h_index: SphereIndex,
    levels: Vec<usize>,
    lmax: usize,
    qpow: Vec<i128>,
}

impl<'a> Kernel<'a> {
    fn new(rank: Rank, n: usize, g: &'a [ZSqrt], g_index: SphereIndex, h: &'a [ZSqrt], h_index: SphereIndex) -> Result<Self> {
        let (dg, dh) = (g_index.depth(), h_index.depth());
        let levels: Vec<usize> = (0..=n)
            .map(|p| {
                if p == n {
                    dh.max(n + dg)
                } else {
                    (p + 1).max(dh).max((2 * p + dg).saturating_sub(n))
                }
            })
            .collect();
        let lmax = *levels.iter().max().expect("n + 1 levels");
        let qpow = powers(rank.q() as i128, lmax + n + 1)?;
        Ok(Kernel {
            rank,
            n,
            g,
            h,
            g_index,
            h_index,
            levels,
            lmax,
            qpow,
        })
    }

    /// `q^(n/2) <pi(gamma) g, h> = value / (2r q^(lmax - 1) den_g den_h)`.
    fn denominator(&self) -> BigInt {
        BigInt::from(self.rank.alphabet_len()) * num_traits::pow(BigInt::from(self.rank.q()), self.lmax - 1)
    }

    fn eval(&self, gc: &[u16]) -> Result<ZSqrt> {
        let rank = self.rank;
        let n = self.n;
        let dg = self.g_index.depth();
        let dh = self.h_index.depth();
        let ginv: Codes = gc.iter().rev().map(|&c| rank.inv_code(c)).collect();
        let qi = rank.q() as i128;
        let top = rank.alphabet_len() as u16;
        let mut acc = ZSqrt::ZERO;
        let mut xi: Codes = Vec::with_capacity(self.lmax);
        let mut gbuf: Codes = Vec::with_capacity(dg);
        for p in 0..=n {
            let level = self.levels[p];
            let weight = self.qpow[p + self.lmax - level];
            let k = n - p;
            let mut block = ZSqrt::ZERO;
            let mut cell = |xi: &[u16]| -> Result<()> {
                gbuf.clear();
                let lead = dg.min(k);
                gbuf.extend_from_slice(&ginv[..lead]);
                gbuf.extend_from_slice(&xi[p..p + dg - lead]);
                let gv = self.g[self.g_index.index_of_codes(&gbuf)];
                if gv.is_zero() {
                    return Ok(());
                }
                let hv = self.h[self.h_index.index_of_codes(&xi[..dh])];
                block = block.checked_add(gv.checked_mul(hv, qi)?)?;
                Ok(())
            };
            xi.clear();
            xi.extend_from_slice(&gc[..p]);
            if p == n {
                for_each_extension(rank, &mut xi, level, &mut cell)?;
            } else {
                let forbidden = if p == 0 { None } else { Some(rank.inv_code(gc[p - 1])) };
                for t in (0..top).filter(|&t| t != gc[p] && Some(t) != forbidden) {
                    xi.truncate(p);
                    xi.push(t);
                    for_each_extension(rank, &mut xi, level, &mut cell)?;
                }
            }
            acc = acc.checked_add(block.checked_scale(weight)?)?;
        }
        Ok(acc)
    }
}

/// Calls `f` on every reduced extension of `buf` to length `len`.
fn for_each_extension<F: FnMut(&[u16]) -> Result<()>>(rank: Rank, buf: &mut Codes, len: usize, f: &mut F) -> Result<()> {
    if buf.len() >= len {
        return f(buf);
    }
    let forbidden = buf.last().map(|&c| rank.inv_code(c));
    let start = buf.len();
    for t in 0..rank.alphabet_len() as u16 {
        if Some(t) == forbidden {
            continue;
        }
        buf.push(t);
        for_each_extension(rank, buf, len, f)?;
        buf.truncate(start);
    }
    Ok(())
}

/// Which route [`m_n_coeff`] took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffRoute {
    Grouped,
    Enumerated,
}

struct CoeffSetup<'a> {
    rank: Rank,
    n: usize,
    eval: SphereEval,
    kernel: Kernel<'a>,
    scale: Rational,
}

#[allow(clippy::too_many_arguments)]
fn coeff_setup<'a>(
    f: &VertexFunction,
    n: usize,
    g: &StepFunction,
    h: &StepFunction,
    gi: &'a [ZSqrt],
    dg: &BigInt,
    hi: &'a [ZSqrt],
    dh: &BigInt,
) -> Result<CoeffSetup<'a>> {
    ensure_sphere(n)?;
    let rank = g.rank();
    if h.rank() != rank {
        return Err(Error::RankMismatch(rank.get(), h.rank().get()));
    }
    let eval = SphereEval::new(rank, f, n)?;
    let kernel = Kernel::new(rank, n, gi, g.index(), hi, h.index())?;
    let den = kernel.denominator() * dg * dh * &eval.den;
    let scale = average_prefactor(rank, n) / Rational::from_integer(den);
    Ok(CoeffSetup {
        rank,
        n,
        eval,
        kernel,
        scale,
    })
}

fn enumerated_sum(s: &CoeffSetup) -> Result<ZSqrt> {
    fold_words(
        s.rank,
        &[],
        s.n,
        || Ok(ZSqrt::ZERO),
        |acc: Result<ZSqrt>, gc| {
            let acc = acc?;
            let fv = s.eval.eval(gc);
            if fv == 0 {
                return Ok(acc);
            }
            acc.checked_add(s.kernel.eval(gc)?.checked_scale(fv)?)
        },
        |a, b| a?.checked_add(b?),
    )
}

/// A reduced word `prefix . middle . suffix` of total length `n`, or `None`
/// when the pieces cannot be joined (or overlap).
fn join_with_middle(rank: Rank, prefix: &[u16], suffix: &[u16], n: usize) -> Option<Codes> {
    let m = n.checked_sub(prefix.len() + suffix.len())?;
    let mut codes: Codes = prefix.to_vec();
    for i in 0..m {
        let prev = codes.last().map(|&c| rank.inv_code(c));
        let next_forbidden = if i + 1 == m { suffix.first().map(|&c| rank.inv_code(c)) } else { None };
        let t = (0..rank.alphabet_len() as u16).find(|&t| Some(t) != prev && Some(t) != next_forbidden)?;
        codes.push(t);
    }
    if m == 0 {
        if let (Some(&a), Some(&b)) = (codes.last(), suffix.first()) {
            if b == rank.inv_code(a) {
                return None;
            }
        }
    }
    codes.extend_from_slice(suffix);
    Some(codes)
}

fn group_count(rank: Rank, n: usize, prefix: &ReducedWord, suffix: &ReducedWord) -> Result<i128> {
    let q = BigInt::from(rank.q());
    let count = match (prefix.is_empty(), suffix.is_empty()) {
        (true, true) => BigInt::from(sphere_count(rank, n)),
        (false, true) => num_traits::pow(q, n - prefix.len()),
        (true, false) => num_traits::pow(q, n - suffix.len()),
        (false, false) => BigInt::from(count_prefix_suffix(rank, n, prefix, &suffix.inverse())?),
    };
    count.to_i128().ok_or(Error::Overflow)
}

fn grouped_sum(s: &CoeffSetup, a: usize, b: usize) -> Result<ZSqrt> {
    let rank = s.rank;
    let mut acc = ZSqrt::ZERO;
    let suffixes: Vec<ReducedWord> = enumerate_sphere(rank, b).collect();
    for prefix in enumerate_sphere(rank, a) {
        let pc = rank.codes(&prefix);
        for suffix in &suffixes {
            let sc = rank.codes(suffix);
            let Some(rep) = join_with_middle(rank, &pc, &sc, s.n) else {
                continue;
            };
            let fv = s.eval.eval(&rep);
            if fv == 0 {
                continue;
            }
            let count = group_count(rank, s.n, &prefix, suffix)?;
            if count == 0 {
                continue;
            }
            let k = s.kernel.eval(&rep)?;
            acc = acc.checked_add(k.checked_scale(fv)?.checked_scale(count)?)?;
        }
    }
    Ok(acc)
}

fn coeff_with(
    f: &VertexFunction,
    n: usize,
    g: &StepFunction,
    h: &StepFunction,
    route: Option<CoeffRoute>,
) -> Result<(QuadExt, CoeffRoute)> {
    let (gi, dg) = integerize(g.values())?;
    let (hi, dh) = integerize(h.values())?;
    let setup = coeff_setup(f, n, g, h, &gi, &dg, &hi, &dh)?;
    let q = setup.rank.q();
    let grouping = setup
        .eval
        .prefix_len()
        .map(|u| (u.max(h.depth()), g.depth()))
        .filter(|(a, b)| n > a + b);
    let route = match (route, grouping) {
        (Some(CoeffRoute::Grouped), None) => {
            return Err(Error::Parse(
                "grouping needs a constant or chi function and n > prefix + suffix depth".into(),
            ))
        }
        (Some(r), _) => r,
        (None, Some(_)) => CoeffRoute::Grouped,
        (None, None) => CoeffRoute::Enumerated,
    };
    if setup.eval.vanishes() {
        return Ok((QuadExt::zero(q), route));
    }
    let sum = match route {
        CoeffRoute::Grouped => {
            let (a, b) = grouping.expect("checked above");
            grouped_sum(&setup, a, b)?
        }
        CoeffRoute::Enumerated => enumerated_sum(&setup)?,
    };
    Ok((sum.to_quad(&QuadExt::from_rational(setup.scale, q)), route))
}

/// `<M_n(f) g, h>`, exact. Groups `S_n` by the prefix and suffix that the
/// summand depends on when `f` allows it and `n` is large enough, and
/// enumerates `S_n` otherwise.
pub fn m_n_coeff(f: &VertexFunction, n: usize, g: &StepFunction, h: &StepFunction) -> Result<QuadExt> {
    coeff_with(f, n, g, h, None).map(|(v, _)| v)
}

/// [`m_n_coeff`] through a chosen route.
pub fn m_n_coeff_via(
    f: &VertexFunction,
    n: usize,
    g: &StepFunction,
    h: &StepFunction,
    route: CoeffRoute,
) -> Result<QuadExt> {
    coeff_with(f, n, g, h, Some(route)).map(|(v, _)| v)
}

/// The route [`m_n_coeff`] takes for these arguments.
pub fn m_n_coeff_route(f: &VertexFunction, n: usize, g: &StepFunction, h: &StepFunction) -> Result<CoeffRoute> {
    coeff_with(f, n, g, h, None).map(|(_, r)| r)
}

/// `<M(f) g, h> = integral(g) * integral(f|_B h)`.
pub fn limit_coeff(f: &VertexFunction, g: &StepFunction, h: &StepFunction) -> Result<QuadExt> {
    let rank = g.rank();
    let fb = f.chi_boundary(rank)?;
    Ok(g.integrate() * fb.mul(h)?.integrate())
}

/// Product rule for `chi_u chi_v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "word")]
pub enum ChiProduct {
    EqualsChi(ReducedWord),
    Zero,
    /// `chi_u^2 - chi_u` is compactly supported in the tree.
    ChiPlusCompact(ReducedWord),
}

pub fn chi_product_normal_form(u: &ReducedWord, v: &ReducedWord) -> Result<ChiProduct> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyWord("chi products need nonempty words"));
    }
    Ok(if u == v {
        ChiProduct::ChiPlusCompact(u.clone())
    } else if u.is_prefix_of(v) {
        ChiProduct::EqualsChi(v.clone())
    } else if v.is_prefix_of(u) {
        ChiProduct::EqualsChi(u.clone())
    } else {
        ChiProduct::Zero
    })
}

/// Pointwise validation of one product rule.
#[derive(Clone, Debug, Serialize)]
pub struct ChiProductCheck {
    pub u: ReducedWord,
    pub v: ReducedWord,
    pub normal_form: ChiProduct,
    pub vertices_checked: usize,
    pub vertices_ok: bool,
    pub boundary_depth: usize,
    pub boundary_ok: bool,
}

pub fn chi_product_check(
    rank: Rank,
    u: &ReducedWord,
    v: &ReducedWord,
    max_len: usize,
    depth: usize,
) -> Result<ChiProductCheck> {
    rank.check_word(u)?;
    rank.check_word(v)?;
    let nf = chi_product_normal_form(u, v)?;
    let product = |g: &ReducedWord| u.is_prefix_of(g) && v.is_prefix_of(g);
    let normal = |g: &ReducedWord| match &nf {
        ChiProduct::EqualsChi(w) | ChiProduct::ChiPlusCompact(w) => w.is_prefix_of(g),
        ChiProduct::Zero => false,
    };
    let mut checked = 0;
    let mut vertices_ok = true;
    for n in 0..=max_len {
        for g in enumerate_sphere(rank, n) {
            checked += 1;
            vertices_ok &= product(&g) == normal(&g);
        }
    }
    let bu = StepFunction::indicator(rank, &Cylinder::new(u.clone()))?;
    let bv = StepFunction::indicator(rank, &Cylinder::new(v.clone()))?;
    let lhs = bu.mul(&bv)?;
    let rhs = match &nf {
        ChiProduct::EqualsChi(w) | ChiProduct::ChiPlusCompact(w) => {
            StepFunction::indicator(rank, &Cylinder::new(w.clone()))?
        }
        ChiProduct::Zero => StepFunction::zero(rank, 0)?,
    };
    let d = depth.max(lhs.depth()).max(rhs.depth());
    let boundary_ok = lhs.refine(d)? == rhs.refine(d)?;
    Ok(ChiProductCheck {
        u: u.clone(),
        v: v.clone(),
        normal_form: nf,
        vertices_checked: checked,
        vertices_ok,
        boundary_depth: d,
        boundary_ok,
    })
}

/// Validation of `chi_u - sum_{gamma in Pr_u(k)} chi_gamma`.
#[derive(Clone, Debug, Serialize)]
pub struct ChiDecompositionReport {
    pub u: ReducedWord,
    pub k: usize,
    /// Vertices of length at most the checked length where the difference is nonzero.
    pub support: Vec<ReducedWord>,
    pub vanishes_from_k: bool,
    pub boundary_zero: bool,
}

pub fn chi_decomposition_check(
    rank: Rank,
    u: &ReducedWord,
    k: usize,
    max_len: usize,
    depth: usize,
) -> Result<ChiDecompositionReport> {
    let pieces: Vec<ReducedWord> = crate::word::enumerate_prefixed(rank, u, k)?.collect();
    let mut support = Vec::new();
    for n in 0..=max_len {
        for g in enumerate_sphere(rank, n) {
            let whole = i64::from(u.is_prefix_of(&g));
            let parts = pieces.iter().filter(|p| p.is_prefix_of(&g)).count() as i64;
            if whole != parts {
                support.push(g);
            }
        }
    }
    let vanishes_from_k = support.iter().all(|g| g.len() < k);
    let d = depth.max(k);
    let mut diff = StepFunction::indicator(rank, &Cylinder::new(u.clone()))?.refine(d)?;
    let minus_one = QuadExt::from_int(-1, rank.q());
    for p in &pieces {
        let ind = StepFunction::indicator(rank, &Cylinder::new(p.clone()))?.scale(&minus_one);
        diff = diff.add(&ind)?;
    }
    let boundary_zero = diff.values().iter().all(QuadExt::is_zero);
    Ok(ChiDecompositionReport {
        u: u.clone(),
        k,
        support,
        vanishes_from_k,
        boundary_zero,
    })
}

/// Operator norm of the depth-`d` compression of `M_n(1)`.
#[derive(Clone, Debug, Serialize)]
pub struct CompressionNorm {
    pub rank: u32,
    pub n: usize,
    pub depth: usize,
    pub dimension: usize,
    pub norm: f64,
    pub min_eigenvalue: f64,
    /// Exact symmetry of the matrix (self-adjointness of `M_n(1)`).
    pub symmetric: bool,
    pub within_upper: bool,
    pub within_lower: bool,
    pub tolerance: f64,
}

/// `<M_n(1) 1_{B_v}, 1_{B_w}>` for all `v, w` in `S_d`.
pub fn compression_matrix(rank: Rank, n: usize, d: usize, cap: usize) -> Result<Vec<Vec<QuadExt>>> {
    ensure_sphere(n)?;
    let dim = sphere_len(rank, d)?;
    if dim > cap {
        return Err(Error::DimensionCap {
            dim: dim as u128,
            cap: cap as u128,
        });
    }
    let idx = SphereIndex::new(rank, d)?;
    let one = SphereEval::new(rank, &VertexFunction::constant(1), n)?;
    let q = rank.q();
    let factor = average_prefactor(rank, n)
        * BoundaryMeasureContext::new(rank).depth_measure(n + d);
    let factor = QuadExt::from_rational(factor, q);
    let mut matrix = Vec::with_capacity(dim);
    for v in 0..dim {
        let mut basis = vec![ZSqrt::ZERO; dim];
        basis[v] = ZSqrt { a: 1, b: 0 };
        let (raw, out) = m_n_apply_raw(rank, &one, n, &basis, &idx)?;
        let mut buf = Vec::with_capacity(d);
        let row = (0..dim)
            .map(|w| {
                idx.codes_at(w, &mut buf);
                let range = out.prefix_range_codes(&buf);
                let mut s = ZSqrt::ZERO;
                for z in &raw[range] {
                    s = s.checked_add(*z)?;
                }
                Ok(s.to_quad(&factor))
            })
            .collect::<Result<Vec<_>>>()?;
        matrix.push(row);
    }
    Ok(matrix)
}

pub fn compression_norm(rank: Rank, n: usize, d: usize, cap: usize) -> Result<CompressionNorm> {
    if d == 0 {
        return Err(Error::Parse("compression depth must be at least 1".into()));
    }
    let matrix = compression_matrix(rank, n, d, cap)?;
    let dim = matrix.len();
    let symmetric = (0..dim).all(|i| (0..i).all(|j| matrix[i][j] == matrix[j][i]));
    let mu = BoundaryMeasureContext::new(rank).depth_measure(d);
    let inv_mu = QuadExt::from_rational(mu.recip(), rank.q());
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let sym = (&matrix[i][j] + &matrix[j][i]).scale(&Rational::new(1.into(), 2.into()));
        (&sym * &inv_mu).to_f64()
    });
    let eig = m.symmetric_eigen();
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let min_eigenvalue = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    Ok(CompressionNorm {
        rank: rank.get(),
        n,
        depth: d,
        dimension: dim,
        norm,
        min_eigenvalue,
        symmetric,
        within_upper: norm <= 1.0 + NORM_TOLERANCE,
        within_lower: norm >= 1.0 - NORM_TOLERANCE,
        tolerance: NORM_TOLERANCE,
    })
}

/// Cyclicity data for `1_B` under the depth-`d` compression.
#[derive(Clone, Debug, Serialize)]
pub struct CyclicityReport {
    pub rank: u32,
    pub n_max: usize,
    pub depth: usize,
    pub vectors: usize,
    pub dimension: usize,
    pub gram_rank: usize,
    pub full: bool,
}

/// Rank of the Gram matrix of `{P_d pi(gamma) 1_B : |gamma| <= n_max}`.
pub fn cyclicity_rank(rank: Rank, n_max: usize, d: usize, cap: usize) -> Result<CyclicityReport> {
    let ctx = RepContext::new(rank);
    let dim = sphere_len(rank, d)?;
    let gammas: Vec<ReducedWord> = (0..=n_max).flat_map(|n| enumerate_sphere(rank, n)).collect();
    if gammas.len() > cap || dim > cap {
        return Err(Error::DimensionCap {
            dim: gammas.len().max(dim) as u128,
            cap: cap as u128,
        });
    }
    let cylinders: Vec<Cylinder> = enumerate_sphere(rank, d).map(Cylinder::new).collect();
    let mu = BoundaryMeasureContext::new(rank).depth_measure(d);
    let inv_mu = mu.recip();
    // coordinates on the depth-d cylinders: <pi(gamma) 1_B, 1_{B_v}> / mu_d
    let vectors: Vec<Vec<QuadExt>> = gammas
        .iter()
        .map(|g| {
            cylinders
                .iter()
                .map(|c| Ok(ctx.coeff_cylinder(g, c)?.scale(&inv_mu)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let q = rank.q();
    let gram: Vec<Vec<QuadExt>> = vectors
        .iter()
        .map(|x| {
            vectors
                .iter()
                .map(|y| {
                    let mut acc = QuadExt::zero(q);
                    for (a, b) in x.iter().zip(y) {
                        acc = acc + a * b;
                    }
                    acc.scale(&mu)
                })
                .collect()
        })
        .collect();
    let gram_rank = matrix_rank(gram)?;
    Ok(CyclicityReport {
        rank: rank.get(),
        n_max,
        depth: d,
        vectors: gammas.len(),
        dimension: dim,
        gram_rank,
        full: gram_rank == dim,
    })
}

/// One row of a convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientEntry {
    pub n: usize,
    pub exact: QuadExt,
    pub float: f64,
    pub deviation: f64,
}

/// `<M_n(f) g, h>` over a range of `n`, with the limit `<M(f) g, h>`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientSequence {
    pub f: String,
    pub entries: Vec<CoefficientEntry>,
    pub limit: QuadExt,
    pub limit_float: f64,
    /// Least-squares slope of `log deviation` against `log n` over the last
    /// half of the range; `None` when fewer than two nonzero deviations remain.
    pub rate_exponent: Option<f64>,
}

impl CoefficientSequence {
    pub fn first_deviation(&self) -> Option<f64> {
        self.entries.first().map(|e| e.deviation)
    }

    pub fn last_deviation(&self) -> Option<f64> {
        self.entries.last().map(|e| e.deviation)
    }
}

/// Slope of the least-squares line through `(ln x, ln y)` for `y > 0`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_table(
    f: &VertexFunction,
    g: &StepFunction,
    h: &StepFunction,
    ns: impl IntoIterator<Item = usize>,
) -> Result<CoefficientSequence> {
    let limit = limit_coeff(f, g, h)?;
    let limit_float = limit.to_f64();
    let entries = ns
        .into_iter()
        .map(|n| {
            let exact = m_n_coeff(f, n, g, h)?;
            let deviation = (&exact - &limit).abs().to_f64();
            Ok(CoefficientEntry {
                n,
                float: exact.to_f64(),
                exact,
                deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &entries[entries.len() / 2..];
    let points: Vec<(f64, f64)> = tail.iter().map(|e| (e.n as f64, e.deviation)).collect();
    Ok(CoefficientSequence {
        f: f.to_string(),
        rate_exponent: log_log_slope(&points),
        entries,
        limit,
        limit_float,
    })
}

/// The `O(1/n)` decay of `<M_n(chi_u) g, 1_{B_w}>` for `B_u`, `B_w` disjoint.
#[derive(Clone, Debug, Serialize)]
pub struct Matrix1Report {
    pub u: ReducedWord,
    pub w: ReducedWord,
    pub entries: Vec<CoefficientEntry>,
    /// `max over n of n |value(n)|`.
    pub empirical_constant: f64,
    /// Empirical `sup ratio * |gamma|` for `w` over the same lengths.
    pub harish_constant: QuadExt,
    /// `mu(B_u) * harish_constant`, which bounds `n |value(n)|`.
    pub reported_bound: QuadExt,
    /// `mu(B_u) / (2 (r - 1))`.
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub analytic_bound: Rational,
    pub holds: bool,
}

/// Needs `0 <= g <= 1_B` so that `<pi(gamma) g, 1_{B_w}> <= <pi(gamma) 1_B, 1_{B_w}>`.
pub fn matrix1_diagnostic(
    u: &ReducedWord,
    g: &StepFunction,
    w: &ReducedWord,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Matrix1Report> {
    let rank = g.rank();
    if u.is_prefix_of(w) || w.is_prefix_of(u) {
        return Err(Error::PrefixOfGamma(format!("{} and {} are comparable", u.pretty(), w.pretty())));
    }
    let one = StepFunction::one(rank);
    if !g.is_nonnegative() || !one.zip_with(g, |a, b| a - b)?.is_nonnegative() {
        return Err(Error::Parse("matrix1 needs 0 <= g <= 1".into()));
    }
    let f = VertexFunction::chi(u.clone())?;
    let h = StepFunction::indicator(rank, &Cylinder::new(w.clone()))?;
    let table = convergence_table(&f, g, &h, ns)?;
    let n_max = table.entries.iter().map(|e| e.n).max().unwrap_or(0);
    let ctx = RepContext::new(rank);
    let harish_constant = ctx.harish_constant_empirical(w, n_max)?;
    let mu_u = BoundaryMeasureContext::new(rank).depth_measure(u.len());
    let reported_bound = harish_constant.scale(&mu_u);
    let analytic_bound = &mu_u / Rational::from_integer(BigInt::from(2 * (rank.get() - 1)));
    let mut holds = true;
    let mut empirical: f64 = 0.0;
    for e in &table.entries {
        let scaled = e.exact.abs().scale(&Rational::from_integer(e.n.into()));
        holds &= scaled <= reported_bound;
        empirical = empirical.max(scaled.to_f64());
    }
    holds &= reported_bound <= QuadExt::from_rational(analytic_bound.clone(), rank.q());
    Ok(Matrix1Report {
        u: u.clone(),
        w: w.clone(),
        entries: table.entries,
        empirical_constant: empirical,
        harish_constant,
        reported_bound,
        analytic_bound,
        holds,
    })
}

/// One length of the `limsup <= mu(B_u) mu(B_v)` check.
#[derive(Clone, Debug, Serialize)]
pub struct Matrix2Entry {
    pub n: usize,
    pub value: QuadExt,
    /// `|S_n|^-1 #{gamma : v prefix of gamma, u prefix of gamma^-1}`.
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub pair_term: Rational,
    /// Sum over `gamma` outside `C_v` with `u` a prefix of `gamma^-1`.
    pub epsilon: QuadExt,
    /// `epsilon + max(pair_term - mu mu, 0)`, so that `value <= mu mu + correction`.
    pub correction: QuadExt,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Matrix2Report {
    pub u: ReducedWord,
    pub v: ReducedWord,
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub limit: Rational,
    pub entries: Vec<Matrix2Entry>,
    /// `max over n of n * epsilon(n)`, the constant of the `O(1/n)` term.
    pub epsilon_constant: f64,
    pub holds: bool,
}

/// `sum over gamma in S_n, v not a prefix of gamma, u a prefix of gamma^-1`
/// of `<pi(gamma) 1_B, 1_{B_v}>`.
fn matrix2_outside_sum(rank: Rank, n: usize, u: &ReducedWord, v: &ReducedWord) -> Result<QuadExt> {
    let ctx = RepContext::new(rank);
    let q = rank.q();
    let cv = Cylinder::new(v.clone());
    let mut acc = QuadExt::zero(q);
    if n < v.len() + u.len() + 1 {
        let ui = u.inverse();
        for g in enumerate_sphere(rank, n) {
            if g.len() >= ui.len() && g.suffix(ui.len()) == ui && !v.is_prefix_of(&g) {
                acc = acc + ctx.coeff_cylinder(&g, &cv)?;
            }
        }
        return Ok(acc);
    }
    // the coefficient depends only on the first |v| letters here
    let vc = rank.codes(v);
    let uic = rank.codes(&u.inverse());
    for prefix in enumerate_sphere(rank, v.len()) {
        if &prefix == v {
            continue;
        }
        let count = count_prefix_suffix(rank, n, &prefix, u)?;
        if count.is_zero() {
            continue;
        }
        let rep = join_with_middle(rank, &rank.codes(&prefix), &uic, n).expect("n > |u| + |v|");
        debug_assert!(!rep.starts_with(&vc));
        let c = ctx.coeff_cylinder(&rank.word(&rep), &cv)?;
        acc = acc + c.scale(&Rational::from_integer(BigInt::from(count)));
    }
    Ok(acc)
}

pub fn matrix2_diagnostic(
    rank: Rank,
    u: &ReducedWord,
    v: &ReducedWord,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Matrix2Report> {
    let f = VertexFunction::chi(u.clone())?;
    if v.is_empty() {
        return Err(Error::EmptyWord("matrix2 needs a nonempty v"));
    }
    let g = StepFunction::indicator(rank, &Cylinder::new(v.clone()))?;
    let one = StepFunction::one(rank);
    let ctx = BoundaryMeasureContext::new(rank);
    let limit = ctx.depth_measure(u.len()) * ctx.depth_measure(v.len());
    let q = rank.q();
    let limit_q = QuadExt::from_rational(limit.clone(), q);
    let mut entries = Vec::new();
    let mut epsilon_constant: f64 = 0.0;
    for n in ns {
        let value = m_n_coeff(&f, n, &g, &one)?;
        let size = Rational::from_integer(BigInt::from(sphere_count(rank, n)));
        let pair = Rational::from_integer(BigInt::from(count_prefix_suffix(rank, n, v, u)?)) / &size;
        let outside = matrix2_outside_sum(rank, n, u, v)?;
        let epsilon = outside.checked_div(&xi_closed(rank, n))?.scale(&size.recip());
        let excess = &pair - &limit;
        let excess = if excess.is_positive() { excess } else { Rational::zero() };
        let correction = epsilon.clone() + QuadExt::from_rational(excess, q);
        let holds = value <= QuadExt::from_rational(pair.clone(), q) + epsilon.clone()
            && value <= &limit_q + &correction;
        epsilon_constant = epsilon_constant.max(n as f64 * epsilon.to_f64());
        entries.push(Matrix2Entry {
            n,
            value,
            pair_term: pair,
            epsilon,
            correction,
            holds,
        });
    }
    let holds = entries.iter().all(|e| e.holds);
    Ok(Matrix2Report {
        u: u.clone(),
        v: v.clone(),
        limit,
        entries,
        epsilon_constant,
        holds,
    })
}

/// `f >= 0` and `g >= 0` give `M_n(f) g >= 0`; exposed for property checks.
pub fn positivity_applies(f: &VertexFunction, g: &StepFunction) -> bool {
    f.is_nonnegative() && g.is_nonnegative()
}
