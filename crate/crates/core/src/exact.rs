//! Exact scalars: big rationals and the quadratic extension `Q(sqrt(q))`.
//!
//! Every measure, kernel value and inner product in this crate lives in
//! `Q(sqrt(2r - 1))`. Values are kept normalized: when the radicand is a
//! perfect square the irrational part is folded into the rational part, so
//! structural equality is mathematical equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Formats a rational as `p/q`, or `p` when it is an integer.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-0.125`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("malformed rational {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int_digits}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    let num: BigInt = text.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(num))
}

fn perfect_sqrt(q: u64) -> Option<u64> {
    let s = q.sqrt();
    (s * s == q).then_some(s)
}

fn rational_to_f64(x: &Rational) -> f64 {
    if let Some(v) = x.to_f64() {
        return v;
    }
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// An exact element `a + b*sqrt(q)` of `Q(sqrt(q))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    radicand: u64,
}

impl QuadExt {
    /// Builds `a + b*sqrt(q)`, folding `sqrt(q)` into `a` for perfect squares.
    ///
    /// Panics if `q == 0`.
    pub fn new(a: Rational, b: Rational, radicand: u64) -> Self {
        assert!(radicand > 0, "radicand must be positive");
        let mut x = QuadExt { a, b, radicand };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.b.is_zero() {
            return;
        }
        if let Some(s) = perfect_sqrt(self.radicand) {
            let folded = std::mem::replace(&mut self.b, Rational::zero());
            self.a += folded * Rational::from_integer(BigInt::from(s));
        }
    }

    pub fn from_rational(a: Rational, radicand: u64) -> Self {
        QuadExt::new(a, Rational::zero(), radicand)
    }

    pub fn from_int(a: i64, radicand: u64) -> Self {
        Self::from_rational(rat_int(a), radicand)
    }

    pub fn zero(radicand: u64) -> Self {
        Self::from_rational(Rational::zero(), radicand)
    }

    pub fn one(radicand: u64) -> Self {
        Self::from_rational(Rational::one(), radicand)
    }

    /// The element `sqrt(q)` itself.
    pub fn sqrt(radicand: u64) -> Self {
        QuadExt::new(Rational::zero(), Rational::one(), radicand)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.radicand == other.radicand {
            Ok(())
        } else {
            Err(Error::RadicandMismatch(self.radicand, other.radicand))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(QuadExt::new(
            &self.a + &other.a,
            &self.b + &other.b,
            self.radicand,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(QuadExt::new(
            &self.a - &other.a,
            &self.b - &other.b,
            self.radicand,
        ))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let q = Rational::from_integer(BigInt::from(self.radicand));
        let a = &self.a * &other.a + q * (&self.b * &other.b);
        let b = &self.a * &other.b + &other.a * &self.b;
        Ok(QuadExt::new(a, b, self.radicand))
    }

    /// Multiplicative inverse through the conjugate, `(a - b sqrt q) / (a^2 - q b^2)`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let norm = self.norm();
        // Only reachable for perfect squares, which normalization already excludes.
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadExt::new(
            &self.a / &norm,
            -(&self.b / &norm),
            self.radicand,
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.checked_mul(&other.inv()?)
    }

    /// Field norm `a^2 - q b^2`.
    pub fn norm(&self) -> Rational {
        let q = Rational::from_integer(BigInt::from(self.radicand));
        &self.a * &self.a - q * (&self.b * &self.b)
    }

    pub fn conjugate(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone(), self.radicand)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        QuadExt::new(&self.a * k, &self.b * k, self.radicand)
    }

    /// Exact sign of the real number, with `sqrt(q) > 0`.
    pub fn signum(&self) -> i8 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // a and b sqrt(q) have opposite signs: compare a^2 with q b^2.
        let q = Rational::from_integer(BigInt::from(self.radicand));
        match (&self.a * &self.a).cmp(&(q * (&self.b * &self.b))) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Floating approximation of `a + b sqrt(q)`; reporting only.
    pub fn to_f64(&self) -> f64 {
        let a = rational_to_f64(&self.a);
        if self.b.is_zero() {
            return a;
        }
        let b = rational_to_f64(&self.b);
        let s = (self.radicand as f64).sqrt();
        if sign_of(&self.a) * sign_of(&self.b) < 0 {
            // Avoid cancellation: (a^2 - q b^2) / (a - b sqrt q).
            rational_to_f64(&self.norm()) / (a - b * s)
        } else {
            a + b * s
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = QuadExt::one(self.radicand);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

fn sign_of(x: &Rational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// `q^(k/2)` as an exact element of `Q(sqrt(q))`.
pub fn half_power(q: u64, k: i64) -> QuadExt {
    let whole = k.unsigned_abs() / 2;
    let odd = k.unsigned_abs() % 2 == 1;
    let qi = BigInt::from(q);
    let p = num_traits::pow(qi, whole as usize);
    let magnitude = if odd {
        QuadExt::new(Rational::zero(), Rational::from_integer(p), q)
    } else {
        QuadExt::from_rational(Rational::from_integer(p), q)
    };
    if k >= 0 {
        magnitude
    } else {
        magnitude.inv().expect("q^(k/2) is nonzero")
    }
}

impl PartialOrd for QuadExt {
    /// Exact comparison; `None` when the radicands differ.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.checked_sub(other).ok()?;
        Some(diff.signum().cmp(&0))
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -self.a,
            b: -self.b,
            radicand: self.radicand,
        }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -self.clone()
    }
}

// Operator forms panic on radicand mismatch; the `checked_*` forms report it.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadExt> for &QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                self.$checked(rhs).expect("radicand mismatch")
            }
        }
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$checked(&rhs).expect("radicand mismatch")
            }
        }
        impl $tr<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$checked(rhs).expect("radicand mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl fmt::Display for QuadExt {
    /// `p/q`, `p/q·sqrt(D)` or `p/q + p'/q'·sqrt(D)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", format_rational(&self.a));
        }
        let b_abs = format_rational(&self.b.abs());
        let neg = self.b.is_negative();
        if self.a.is_zero() {
            let sign = if neg { "-" } else { "" };
            write!(f, "{sign}{b_abs}·sqrt({})", self.radicand)
        } else {
            let sign = if neg { "-" } else { "+" };
            write!(
                f,
                "{} {sign} {b_abs}·sqrt({})",
                format_rational(&self.a),
                self.radicand
            )
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QuadExtJson {
    a: String,
    b: String,
    radicand: u64,
    #[serde(default, skip_deserializing)]
    float: f64,
}

/// Serializes a rational as its `p/q` string.
pub fn serialize_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_json(x))
}

pub fn rational_json(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QuadExtJson {
            a: rational_json(&self.a),
            b: rational_json(&self.b),
            radicand: self.radicand,
            float: self.to_f64(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = QuadExtJson::deserialize(deserializer)?;
        if raw.radicand == 0 {
            return Err(serde::de::Error::custom("radicand must be positive"));
        }
        let a = parse_rational(&raw.a).map_err(serde::de::Error::custom)?;
        let b = parse_rational(&raw.b).map_err(serde::de::Error::custom)?;
        Ok(QuadExt::new(a, b, raw.radicand))
    }
}

/// Rank of a matrix over `Q(sqrt q)` by exact Gaussian elimination.
pub fn matrix_rank(mut rows: Vec<Vec<QuadExt>>) -> Result<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv()?;
        let pivot_row: Vec<QuadExt> = rows[rank].iter().map(|x| x * &inv).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = x.checked_sub(&(&factor * p))?;
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    Ok(rank)
}

/// An element `a + b sqrt(q)` of `Z[sqrt(q)]` with machine integers.
///
/// Hot loops accumulate in this form under a shared denominator and convert
/// back to [`QuadExt`] once; every operation is overflow-checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct ZSqrt {
    pub a: i128,
    pub b: i128,
}

impl ZSqrt {
    pub const ZERO: ZSqrt = ZSqrt { a: 0, b: 0 };

    pub fn checked_add(self, o: ZSqrt) -> Result<ZSqrt> {
        Ok(ZSqrt {
            a: self.a.checked_add(o.a).ok_or(Error::Overflow)?,
            b: self.b.checked_add(o.b).ok_or(Error::Overflow)?,
        })
    }

    pub fn checked_sub(self, o: ZSqrt) -> Result<ZSqrt> {
        Ok(ZSqrt {
            a: self.a.checked_sub(o.a).ok_or(Error::Overflow)?,
            b: self.b.checked_sub(o.b).ok_or(Error::Overflow)?,
        })
    }

    pub fn checked_scale(self, k: i128) -> Result<ZSqrt> {
        Ok(ZSqrt {
            a: self.a.checked_mul(k).ok_or(Error::Overflow)?,
            b: self.b.checked_mul(k).ok_or(Error::Overflow)?,
        })
    }

    pub fn checked_mul(self, o: ZSqrt, q: i128) -> Result<ZSqrt> {
        let m = |x: i128, y: i128| x.checked_mul(y).ok_or(Error::Overflow);
        let qbb = m(q, m(self.b, o.b)?)?;
        Ok(ZSqrt {
            a: m(self.a, o.a)?.checked_add(qbb).ok_or(Error::Overflow)?,
            b: m(self.a, o.b)?
                .checked_add(m(self.b, o.a)?)
                .ok_or(Error::Overflow)?,
        })
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// `(a + b sqrt q) * factor`, exact.
    pub fn to_quad(self, factor: &QuadExt) -> QuadExt {
        let q = factor.radicand();
        let raw = QuadExt::new(
            Rational::from_integer(BigInt::from(self.a)),
            Rational::from_integer(BigInt::from(self.b)),
            q,
        );
        &raw * factor
    }
}

/// Writes `values` as `numerators / denominator` with a common positive
/// denominator and machine-integer numerators.
pub(crate) fn integerize(values: &[QuadExt]) -> Result<(Vec<ZSqrt>, BigInt)> {
    let mut den = BigInt::one();
    for v in values {
        den = den.lcm(v.a().denom());
        den = den.lcm(v.b().denom());
    }
    let den_r = Rational::from_integer(den.clone());
    let to_i128 = |x: &Rational| -> Result<i128> {
        let scaled = x * &den_r;
        debug_assert!(scaled.is_integer());
        scaled.to_integer().to_i128().ok_or(Error::Overflow)
    };
    let nums = values
        .iter()
        .map(|v| {
            Ok(ZSqrt {
                a: to_i128(v.a())?,
                b: to_i128(v.b())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((nums, den))
}

/// Integer numerators of `values` under a common denominator.
pub(crate) fn integerize_rationals(values: &[Rational]) -> Result<(Vec<i128>, BigInt)> {
    let mut den = BigInt::one();
    for v in values {
        den = den.lcm(v.denom());
    }
    let den_r = Rational::from_integer(den.clone());
    let nums = values
        .iter()
        .map(|v| (v * &den_r).to_integer().to_i128().ok_or(Error::Overflow))
        .collect::<Result<Vec<_>>>()?;
    Ok((nums, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let q = 3;
        let x = |a: i64| QuadExt::from_int(a, q);
        let s = QuadExt::sqrt(q);
        assert_eq!(matrix_rank(vec![vec![x(1), x(2)], vec![x(2), x(4)]]).unwrap(), 1);
        assert_eq!(matrix_rank(vec![vec![x(1), s.clone()], vec![s.clone(), x(3)]]).unwrap(), 1);
        assert_eq!(matrix_rank(vec![vec![x(1), s.clone()], vec![s, x(1)]]).unwrap(), 2);
        assert_eq!(matrix_rank(vec![vec![x(0)]]).unwrap(), 0);
        assert_eq!(matrix_rank(Vec::new()).unwrap(), 0);
    }

    fn qx(a: Rational, b: Rational, q: u64) -> QuadExt {
        QuadExt::new(a, b, q)
    }

    #[test]
    fn add_examples() {
        let x = qx(rat_int(1), rat_int(0), 3);
        let y = qx(rat_int(0), rat_int(1), 3);
        assert_eq!(&x + &y, qx(rat_int(1), rat_int(1), 3));

        let x = qx(rat(1, 2), rat_int(1), 3);
        let y = qx(rat(1, 2), rat_int(-1), 3);
        assert_eq!(&x + &y, QuadExt::one(3));

        let s9 = QuadExt::sqrt(9);
        let z = &s9 + &QuadExt::zero(9);
        assert_eq!(z, QuadExt::from_int(3, 9));
        assert!(z.b().is_zero());
    }

    #[test]
    fn mul_examples() {
        let s = QuadExt::sqrt(3);
        assert_eq!(&s * &s, QuadExt::from_int(3, 3));
        let x = qx(rat_int(1), rat_int(1), 3);
        let y = qx(rat_int(1), rat_int(-1), 3);
        assert_eq!(&x * &y, QuadExt::from_int(-2, 3));
        // (sqrt3/2) * (2/3) sqrt3 = (1/2)(2/3)3 = 1
        let x = qx(rat_int(0), rat(1, 2), 3);
        let y = qx(rat_int(0), rat(2, 3), 3);
        assert!((&x * &y).is_one());
    }

    #[test]
    fn inv_examples() {
        assert_eq!(
            QuadExt::from_int(2, 3).inv().unwrap(),
            QuadExt::from_rational(rat(1, 2), 3)
        );
        assert_eq!(
            QuadExt::sqrt(3).inv().unwrap(),
            qx(rat_int(0), rat(1, 3), 3)
        );
        let x = qx(rat_int(1), rat_int(1), 3);
        let inv = x.inv().unwrap();
        assert_eq!(inv, qx(rat(-1, 2), rat(1, 2), 3));
        assert!((&inv * &x).is_one());
        assert_eq!(QuadExt::zero(3).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn radicand_mismatch_is_an_error() {
        let e = QuadExt::one(3).checked_add(&QuadExt::one(5));
        assert_eq!(e, Err(Error::RadicandMismatch(3, 5)));
        assert!(QuadExt::one(3).checked_mul(&QuadExt::one(5)).is_err());
    }

    #[test]
    fn half_power_examples() {
        assert_eq!(half_power(3, 2), QuadExt::from_int(3, 3));
        assert_eq!(half_power(3, -1), qx(rat_int(0), rat(1, 3), 3));
        assert_eq!(half_power(3, 3), qx(rat_int(0), rat_int(3), 3));
        assert_eq!(half_power(9, -3), QuadExt::from_rational(rat(1, 27), 9));
        assert!(half_power(5, 0).is_one());
    }

    #[test]
    fn floats() {
        assert!((QuadExt::from_rational(rat(1, 3), 3).to_f64() - 0.333_333_333_333).abs() < 1e-12);
        assert!((QuadExt::sqrt(3).to_f64() - 1.732_050_807_568_877).abs() < 1e-14);
        assert!((QuadExt::from_rational(rat(2, 3), 3).to_f64() - 0.666_666_666_667).abs() < 1e-12);
        // near-cancellation keeps relative accuracy
        let x = qx(rat(97, 56), rat_int(-1), 3);
        let v = x.to_f64();
        assert!(v > 0.0 && (v - (97.0 / 56.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn sign_and_order() {
        let x = qx(rat_int(2), rat_int(-1), 3);
        assert_eq!(x.signum(), 1);
        let y = qx(rat_int(-2), rat_int(1), 3);
        assert_eq!(y.signum(), -1);
        assert!(QuadExt::sqrt(3) > QuadExt::from_rational(rat(17, 10), 3));
        assert!(QuadExt::one(3).partial_cmp(&QuadExt::one(5)).is_none());
    }

    #[test]
    fn display_and_json() {
        assert_eq!(QuadExt::from_rational(rat(2, 3), 3).to_string(), "2/3");
        assert_eq!(qx(rat_int(0), rat(1, 2), 3).to_string(), "1/2·sqrt(3)");
        assert_eq!(qx(rat(-1, 2), rat(-1, 2), 3).to_string(), "-1/2 - 1/2·sqrt(3)");
        let x = qx(rat(-1, 2), rat(1, 2), 3);
        let json = serde_json::to_value(&x).unwrap();
        assert_eq!(json["a"], "-1/2");
        assert_eq!(json["b"], "1/2");
        assert_eq!(json["radicand"], 3);
        assert!(json["float"].is_f64());
        let back: QuadExt = serde_json::from_value(json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational(" 7 ").unwrap(), rat_int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn zsqrt_roundtrip() {
        let vals = vec![
            qx(rat(1, 2), rat(1, 3), 3),
            qx(rat(-5, 4), rat_int(0), 3),
        ];
        let (nums, den) = integerize(&vals).unwrap();
        assert_eq!(den, BigInt::from(12));
        let factor = QuadExt::from_rational(Rational::new(BigInt::one(), den), 3);
        for (z, v) in nums.iter().zip(&vals) {
            assert_eq!(&z.to_quad(&factor), v);
        }
        let big = ZSqrt { a: i128::MAX, b: 0 };
        assert_eq!(big.checked_add(ZSqrt { a: 1, b: 0 }), Err(Error::Overflow));
    }
}
