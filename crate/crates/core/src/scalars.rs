//! Exact scalars: rationals and the quadratic field Q(sqrt p).
//!
//! Half-integral powers of `p` (the `delta^{1/2}` twists and the Satake
//! normalisation `p^{<lambda, rho>}`) live in Q(sqrt p), so that field is the
//! coefficient domain for everything downstream.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always kept in lowest terms with positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"`, used in every JSON payload.
pub fn rat_to_json_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// p-adic valuation of a nonzero rational; `None` for zero.
pub fn p_valuation(r: &Rat, p: u64) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |x: &BigInt| {
        let mut x = x.abs();
        let mut v = 0i64;
        loop {
            let (q, rem) = x.div_rem(&p);
            if !rem.is_zero() {
                return v;
            }
            x = q;
            v += 1;
        }
    };
    Some(count(r.numer()) - count(r.denom()))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p^k` as a rational, negative `k` allowed.
pub fn rat_pow(p: u64, k: i64) -> Rat {
    let base = Rat::from_integer(BigInt::from(p));
    num_traits::pow::Pow::pow(&base, k as i32)
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An element `a + b*sqrt(p)` of Q(sqrt p).
///
/// Arithmetic between elements of different fields panics in the operator
/// impls; the `try_*` methods report it as [`Error::MixedPrime`] instead.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadScalar {
    a: Rat,
    b: Rat,
    p: u64,
}

impl QuadScalar {
    pub fn new(a: Rat, b: Rat, p: u64) -> Result<Self> {
        check_prime(p)?;
        Ok(Self { a, b, p })
    }

    /// Skips the primality check; callers hold a `p` that was already validated.
    pub(crate) fn from_parts(a: Rat, b: Rat, p: u64) -> Self {
        Self { a, b, p }
    }

    pub fn zero(p: u64) -> Self {
        Self::from_parts(Rat::zero(), Rat::zero(), p)
    }

    pub fn one(p: u64) -> Self {
        Self::from_parts(Rat::one(), Rat::zero(), p)
    }

    pub fn from_int(n: i64, p: u64) -> Self {
        Self::from_parts(rat(n), Rat::zero(), p)
    }

    pub fn from_rat(r: Rat, p: u64) -> Self {
        Self::from_parts(r, Rat::zero(), p)
    }

    /// `sqrt(p)` itself.
    pub fn sqrt_p(p: u64) -> Self {
        Self::from_parts(Rat::zero(), Rat::one(), p)
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn p(&self) -> u64 {
        self.p
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

    /// Field norm `a^2 - p b^2`; nonzero exactly when `self` is nonzero.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - rat(self.p as i64) * &self.b * &self.b
    }

    pub fn conjugate(&self) -> Self {
        Self::from_parts(self.a.clone(), -self.b.clone(), self.p)
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::MixedPrime(self.p, other.p))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::from_parts(
            &self.a + &other.a,
            &self.b + &other.b,
            self.p,
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self::from_parts(
            &self.a - &other.a,
            &self.b - &other.b,
            self.p,
        ))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.b.is_zero() && other.b.is_zero() {
            return Ok(Self::from_parts(&self.a * &other.a, Rat::zero(), self.p));
        }
        let p = rat(self.p as i64);
        let a = &self.a * &other.a + &self.b * &other.b * p;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::from_parts(a, b, self.p))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Self::from_parts(self.a.recip(), Rat::zero(), self.p));
        }
        let n = self.norm();
        Ok(Self::from_parts(&self.a / &n, -(&self.b / &n), self.p))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::from_parts(&self.a * r, &self.b * r, self.p)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one(self.p);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Parses the input grammar `a/b+c/d*s`, where `s` stands for sqrt(p).
    ///
    /// Accepted shapes include `2`, `-1/2`, `s`, `-s`, `3*s`, `1/2*s`,
    /// `2+3*s` and `1/2-1/3*s`.
    pub fn parse(text: &str, p: u64) -> Result<Self> {
        check_prime(p)?;
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..bytes.len() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && bytes[i - 1] != b'/' && bytes[i - 1] != b'*' {
                pieces.push(&s[start..i]);
                start = i;
            }
        }
        pieces.push(&s[start..]);
        let mut a = Rat::zero();
        let mut b = Rat::zero();
        for piece in pieces {
            if let Some(head) = piece.strip_suffix('s') {
                let head = head.strip_suffix('*').unwrap_or(head);
                let c = match head {
                    "" | "+" => Rat::one(),
                    "-" => -Rat::one(),
                    h => parse_rat(h.strip_prefix('+').unwrap_or(h))?,
                };
                b += c;
            } else {
                a += parse_rat(piece.strip_prefix('+').unwrap_or(piece))?;
            }
        }
        Ok(Self::from_parts(a, b, p))
    }

    /// Text form matching the input grammar of [`QuadScalar::parse`].
    pub fn to_text(&self) -> String {
        let s_part = |b: &Rat| {
            if b.is_one() {
                "s".to_string()
            } else if *b == -Rat::one() {
                "-s".to_string()
            } else {
                format!("{}*s", fmt_rat(b))
            }
        };
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => fmt_rat(&self.a),
            (true, false) => s_part(&self.b),
            (false, false) => {
                let tail = s_part(&self.b);
                if tail.starts_with('-') {
                    format!("{}{}", fmt_rat(&self.a), tail)
                } else {
                    format!("{}+{}", fmt_rat(&self.a), tail)
                }
            }
        }
    }
}

/// `p^{k/2}` in Q(sqrt p); negative `k` allowed.
pub fn half_power(p: u64, k: i64) -> QuadScalar {
    let m = k.div_euclid(2);
    let r = rat_pow(p, m);
    if k.rem_euclid(2) == 0 {
        QuadScalar::from_parts(r, Rat::zero(), p)
    } else {
        QuadScalar::from_parts(Rat::zero(), r, p)
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Canonical (not numeric) order: lexicographic on `(a, b)`, then `p`.
impl Ord for QuadScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.a
            .cmp(&other.a)
            .then_with(|| self.b.cmp(&other.b))
            .then_with(|| self.p.cmp(&other.p))
    }
}

impl PartialOrd for QuadScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&QuadScalar> for &QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                self.$try(rhs)
                    .expect(concat!("QuadScalar::", stringify!($method)))
            }
        }
        impl $trait<QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: QuadScalar) -> QuadScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl AddAssign<&QuadScalar> for QuadScalar {
    fn add_assign(&mut self, rhs: &QuadScalar) {
        assert_eq!(self.p, rhs.p, "mixed primes");
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl SubAssign<&QuadScalar> for QuadScalar {
    fn sub_assign(&mut self, rhs: &QuadScalar) {
        assert_eq!(self.p, rhs.p, "mixed primes");
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl MulAssign<&QuadScalar> for QuadScalar {
    fn mul_assign(&mut self, rhs: &QuadScalar) {
        *self = &*self * rhs;
    }
}

impl Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar::from_parts(-self.a, -self.b, self.p)
    }
}

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar::from_parts(-self.a.clone(), -self.b.clone(), self.p)
    }
}

impl Serialize for QuadScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("QuadScalar", 3)?;
        st.serialize_field("a", &rat_to_json_string(&self.a))?;
        st.serialize_field("b", &rat_to_json_string(&self.b))?;
        st.serialize_field("p", &self.p)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for QuadScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a: String,
            b: String,
            p: u64,
        }
        let raw = Raw::deserialize(deserializer)?;
        let a = parse_rat(&raw.a).map_err(de::Error::custom)?;
        let b = parse_rat(&raw.b).map_err(de::Error::custom)?;
        QuadScalar::new(a, b, raw.p).map_err(de::Error::custom)
    }
}
