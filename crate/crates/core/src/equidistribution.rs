//! Pair sums `|S_n|^-1 sum_{gamma in S_n} f(gamma) g(gamma^-1)` and their
//! limit `integral(f|_B) integral(g|_B)`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::averaging::{SphereEval, VertexFunction};
use crate::boundary::BoundaryMeasureContext;
use crate::error::{Error, Result};
use crate::exact::{serialize_rational, Rational};
use crate::word::{count_prefix_suffix, fold_words, sphere_count, Rank, ReducedWord};

fn int(x: impl Into<BigInt>) -> Rational {
    Rational::from_integer(x.into())
}

/// `#{gamma in S_n : u prefix of gamma}`.
fn prefix_count(rank: Rank, n: usize, u: &ReducedWord) -> Rational {
    if n < u.len() {
        Rational::zero()
    } else if u.is_empty() {
        int(sphere_count(rank, n))
    } else {
        int(num_traits::pow(BigInt::from(rank.q()), n - u.len()))
    }
}

/// `sum_{gamma in S_n} f(gamma) g(gamma^-1)`.
fn pair_total(rank: Rank, f: &VertexFunction, g: &VertexFunction, n: usize) -> Result<Rational> {
    use VertexFunction::*;
    Ok(match (f, g) {
        (Constant(c), Constant(d)) => c * d * int(sphere_count(rank, n)),
        (Constant(c), ChiCylinder(u)) | (ChiCylinder(u), Constant(c)) => c * prefix_count(rank, n, u),
        (ChiCylinder(u), ChiCylinder(v)) => int(count_prefix_suffix(rank, n, u, v)?),
        (FiniteSupport(t), other) => t
            .iter()
            .filter(|(w, _)| w.len() == n)
            .map(|(w, x)| x * other.chi_eval(&w.inverse()))
            .sum(),
        (other, FiniteSupport(t)) => t
            .iter()
            .filter(|(w, _)| w.len() == n)
            .map(|(w, x)| other.chi_eval(&w.inverse()) * x)
            .sum(),
    })
}

fn check(rank: Rank, f: &VertexFunction, g: &VertexFunction, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroSphere);
    }
    f.check_rank(rank)?;
    g.check_rank(rank)
}

/// Exact pair sum. Every case is closed form or a walk over a finite table.
pub fn pair_sum(rank: Rank, f: &VertexFunction, g: &VertexFunction, n: usize) -> Result<Rational> {
    check(rank, f, g, n)?;
    Ok(pair_total(rank, f, g, n)? / int(sphere_count(rank, n)))
}

/// The pair sum by visiting every word of `S_n`.
pub fn pair_sum_enumerated(rank: Rank, f: &VertexFunction, g: &VertexFunction, n: usize) -> Result<Rational> {
    check(rank, f, g, n)?;
    let fe = SphereEval::new(rank, f, n)?;
    let ge = SphereEval::new(rank, g, n)?;
    let total = fold_words(
        rank,
        &[],
        n,
        || Ok((0i128, Vec::with_capacity(n))),
        |acc: Result<(i128, Vec<u16>)>, w| {
            let (sum, mut inv) = acc?;
            let fv = fe.eval(w);
            if fv == 0 {
                return Ok((sum, inv));
            }
            inv.clear();
            inv.extend(w.iter().rev().map(|&c| rank.inv_code(c)));
            let term = fv.checked_mul(ge.eval(&inv)).ok_or(Error::Overflow)?;
            Ok((sum.checked_add(term).ok_or(Error::Overflow)?, inv))
        },
        |a, b| {
            let (x, v) = a?;
            let (y, _) = b?;
            Ok((x.checked_add(y).ok_or(Error::Overflow)?, v))
        },
    )?
    .0;
    Ok(int(total) / (int(sphere_count(rank, n)) * int(fe.den * ge.den)))
}

/// `integral(f|_B) integral(g|_B)`.
pub fn pair_limit(rank: Rank, f: &VertexFunction, g: &VertexFunction) -> Result<Rational> {
    let a = f.chi_boundary(rank)?.integrate();
    let b = g.chi_boundary(rank)?.integrate();
    debug_assert!(a.b().is_zero() && b.b().is_zero());
    Ok(a.a() * b.a())
}

/// `r / (r - 1)`: the limit of `q^-n sum_{k <= n} |S_k|`.
pub fn cumulative_mass_limit(rank: Rank) -> Rational {
    let r = i64::from(rank.get());
    Rational::new(r.into(), (r - 1).into())
}

/// `q^-n sum_{|gamma| <= n} f(gamma) g(gamma^-1)`.
pub fn cumulative_pair_sum(rank: Rank, f: &VertexFunction, g: &VertexFunction, n: usize) -> Result<Rational> {
    check(rank, f, g, n)?;
    let mut total = f.chi_eval(&ReducedWord::identity()) * g.chi_eval(&ReducedWord::identity());
    for k in 1..=n {
        total += pair_total(rank, f, g, k)?;
    }
    Ok(total / int(num_traits::pow(BigInt::from(rank.q()), n)))
}

/// Cumulative limit `r / (r - 1) * pair_limit`, derived from the geometric
/// growth of spheres.
pub fn cumulative_limit(rank: Rank, f: &VertexFunction, g: &VertexFunction) -> Result<Rational> {
    Ok(cumulative_mass_limit(rank) * pair_limit(rank, f, g)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSumReport {
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub value: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub limit: Rational,
    pub float: f64,
    pub deviation: f64,
    /// `n mod 4`.
    pub class: usize,
}

/// Deviation trend within one residue class of `n mod 4`.
#[derive(Clone, Debug, Serialize)]
pub struct ResidueClass {
    pub residue: usize,
    pub ns: Vec<usize>,
    pub strictly_decreasing: bool,
    /// `deviation(n + 4) / deviation(n)` for the last two entries of the class.
    pub last_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistReport {
    pub f: String,
    pub g: String,
    pub cumulative: bool,
    #[serde(serialize_with = "serialize_rational")]
    pub limit: Rational,
    pub entries: Vec<PairSumReport>,
    pub classes: Vec<ResidueClass>,
}

impl EquidistReport {
    /// Strict decrease in every class, counting only entries with `n >= from`.
    pub fn decreasing_from(&self, from: usize) -> bool {
        (0..4).all(|c| {
            let devs: Vec<&Rational> = self
                .entries
                .iter()
                .filter(|e| e.class == c && e.n >= from)
                .map(|e| &e.value)
                .collect();
            devs.windows(2).all(|w| {
                let a = (w[0] - &self.limit).abs();
                let b = (w[1] - &self.limit).abs();
                b < a
            })
        })
    }
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Per-`n` values and deviations, with trends per residue class mod 4.
/// Deviations are compared exactly.
pub fn equidist_report(
    rank: Rank,
    f: &VertexFunction,
    g: &VertexFunction,
    ns: impl IntoIterator<Item = usize>,
    cumulative: bool,
) -> Result<EquidistReport> {
    let limit = if cumulative {
        cumulative_limit(rank, f, g)?
    } else {
        pair_limit(rank, f, g)?
    };
    let entries = ns
        .into_iter()
        .map(|n| {
            let value = if cumulative {
                cumulative_pair_sum(rank, f, g, n)?
            } else {
                pair_sum(rank, f, g, n)?
            };
            let deviation = rational_to_f64(&(&value - &limit).abs());
            Ok(PairSumReport {
                n,
                float: rational_to_f64(&value),
                value,
                limit: limit.clone(),
                deviation,
                class: n % 4,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let classes = (0..4)
        .map(|residue| {
            let members: Vec<&PairSumReport> = entries.iter().filter(|e| e.class == residue).collect();
            let devs: Vec<Rational> = members.iter().map(|e| (&e.value - &limit).abs()).collect();
            let strictly_decreasing = devs.windows(2).all(|w| w[1] < w[0]);
            let last_ratio = match devs.as_slice() {
                [.., a, b] if !a.is_zero() => Some(rational_to_f64(&(b / a))),
                _ => None,
            };
            ResidueClass {
                residue,
                ns: members.iter().map(|e| e.n).collect(),
                strictly_decreasing,
                last_ratio,
            }
        })
        .collect();
    Ok(EquidistReport {
        f: f.to_string(),
        g: g.to_string(),
        cumulative,
        limit,
        entries,
        classes,
    })
}

/// `mu(B_u) mu(B_v)`, the limit for `chi_u` against `chi_v`.
pub fn chi_pair_limit(rank: Rank, u: &ReducedWord, v: &ReducedWord) -> Rational {
    let m = BoundaryMeasureContext::new(rank);
    m.depth_measure(u.len()) * m.depth_measure(v.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::word::enumerate_sphere;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn chi(s: &str) -> VertexFunction {
        VertexFunction::chi(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn pair_sum_examples() {
        let r = r2();
        let one = VertexFunction::constant(1);
        for n in 1..=6 {
            assert_eq!(pair_sum(r, &one, &one, n).unwrap(), rat(1, 1));
        }
        assert_eq!(pair_sum(r, &chi("a"), &chi("a"), 3).unwrap(), rat(1, 18));
        assert_eq!(pair_sum_enumerated(r, &chi("a"), &chi("a"), 3).unwrap(), rat(1, 18));
        assert!(matches!(pair_sum(r, &one, &one, 0), Err(Error::ZeroSphere)));
    }

    #[test]
    fn limits() {
        let r = r2();
        let one = VertexFunction::constant(1);
        assert_eq!(pair_limit(r, &chi("a"), &chi("b")).unwrap(), rat(1, 16));
        assert_eq!(pair_limit(r, &one, &one).unwrap(), rat(1, 1));
        let t = VertexFunction::FiniteSupport([(ReducedWord::identity(), rat(2, 1))].into());
        assert!(pair_limit(r, &t, &one).unwrap().is_zero());
        assert_eq!(cumulative_limit(r, &chi("a"), &chi("a")).unwrap(), rat(1, 8));
    }

    #[test]
    fn cumulative_examples() {
        let r = r2();
        let one = VertexFunction::constant(1);
        assert_eq!(cumulative_pair_sum(r, &one, &one, 1).unwrap(), rat(5, 3));
        // geometric series, written out
        for n in 1..=8u32 {
            let total: i64 = 1 + (1..=n).map(|k| 4 * 3i64.pow(k - 1)).sum::<i64>();
            assert_eq!(cumulative_pair_sum(r, &one, &one, n as usize).unwrap(), rat(total, 3i64.pow(n)));
        }
    }

    #[test]
    fn cumulative_chi_matches_enumeration() {
        let r = r2();
        let (f, g) = (chi("a"), chi("a"));
        for n in 1..=8usize {
            let mut total = Rational::zero();
            for k in 0..=n {
                for w in enumerate_sphere(r, k) {
                    total += f.chi_eval(&w) * g.chi_eval(&w.inverse());
                }
            }
            let expected = total / int(3u32.pow(n as u32));
            assert_eq!(cumulative_pair_sum(r, &f, &g, n).unwrap(), expected);
        }
    }

    #[test]
    fn tables_match_enumeration() {
        let r = r2();
        let t = VertexFunction::FiniteSupport(
            [("ab".parse().unwrap(), rat(3, 2)), ("BA".parse().unwrap(), rat(-1, 3)), ("a".parse().unwrap(), rat(1, 1))].into(),
        );
        for g in [chi("a"), chi("B"), VertexFunction::constant(2), t.clone()] {
            for n in 1..=4 {
                assert_eq!(pair_sum(r, &t, &g, n).unwrap(), pair_sum_enumerated(r, &t, &g, n).unwrap());
                assert_eq!(pair_sum(r, &g, &t, n).unwrap(), pair_sum_enumerated(r, &g, &t, n).unwrap());
            }
        }
    }

    #[test]
    fn report_classes() {
        let r = r2();
        let rep = equidist_report(r, &chi("a"), &chi("a"), 4..=14, false).unwrap();
        assert!(rep.classes.iter().all(|c| c.strictly_decreasing));
        assert!(rep.decreasing_from(4));
        let one = VertexFunction::constant(1);
        let rep = equidist_report(r, &one, &one, 1..=8, false).unwrap();
        assert!(rep.entries.iter().all(|e| e.deviation == 0.0));
        let ab = equidist_report(r, &chi("a"), &chi("b"), 2..=3, false).unwrap();
        assert_eq!(ab.limit, rat(1, 16));
    }
}
