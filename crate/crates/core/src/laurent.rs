//! Laurent polynomials in `n` variables over Q(sqrt p): the group algebra of
//! the cocharacter lattice `M0 / 0M0 = Z^n` of the diagonal torus.
//!
//! The coset of `diag(p^{a_1}, .., p^{a_n})` is the monomial `x^a`, and left
//! translation by that element is multiplication by `x^a`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalars::QuadScalar;
use crate::weyl::Permutation;

/// Exponent vector; ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ExpVec(pub Vec<i64>);

impl ExpVec {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    /// Weakly decreasing, i.e. a dominant cocharacter.
    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Sorted into weakly decreasing order: the dominant member of the orbit.
    pub fn dominant(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        Self(v)
    }

    /// Image under `w`: the exponent of `x_i` moves to `x_{w(i)}`.
    pub fn permuted(&self, w: &Permutation) -> Self {
        Self(w.permute(&self.0))
    }
}

impl fmt::Display for ExpVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    n: usize,
    p: u64,
    terms: BTreeMap<ExpVec, QuadScalar>,
}

impl LaurentPoly {
    pub fn zero(n: usize, p: u64) -> Self {
        Self {
            n,
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize, p: u64) -> Self {
        Self::monomial(ExpVec::zero(n), QuadScalar::one(p))
    }

    pub fn constant(n: usize, c: QuadScalar) -> Self {
        Self::monomial(ExpVec::zero(n), c)
    }

    pub fn monomial(e: ExpVec, c: QuadScalar) -> Self {
        let mut f = Self::zero(e.len(), c.p());
        f.add_term(e, c);
        f
    }

    /// The variable `x_{i+1}` (0-based `i`).
    pub fn var(n: usize, i: usize, p: u64) -> Self {
        Self::monomial(ExpVec::unit(n, i), QuadScalar::one(p))
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(n: usize, p: u64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, QuadScalar)>,
    {
        let mut f = Self::zero(n, p);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::ArityMismatch(n, e.len()));
            }
            if c.p() != p {
                return Err(Error::MixedPrime(p, c.p()));
            }
            f.add_term(ExpVec(e), c);
        }
        Ok(f)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &ExpVec) -> QuadScalar {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| QuadScalar::zero(self.p))
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExpVec, &QuadScalar)> {
        self.terms.iter()
    }

    /// Lexicographically greatest term.
    pub fn leading(&self) -> Option<(&ExpVec, &QuadScalar)> {
        self.terms.iter().next_back()
    }

    /// Adds `c * x^e` in place, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: ExpVec, c: QuadScalar) {
        debug_assert_eq!(e.len(), self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        if self.p != other.p {
            return Err(Error::MixedPrime(self.p, other.p));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = Self::zero(self.n, self.p);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1.plus(e2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        let mut out = Self::zero(self.n, self.p);
        if c.is_zero() {
            return out;
        }
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x * c);
        }
        out
    }

    /// Multiplication by the monomial `x^e`.
    pub fn shift(&self, e: &ExpVec) -> Self {
        Self {
            n: self.n,
            p: self.p,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.plus(e), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n, self.p);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluation at a point of the torus, `x^a -> prod chi_i^{a_i}`.
    pub fn eval(&self, chi: &[QuadScalar]) -> Result<QuadScalar> {
        if chi.len() != self.n {
            return Err(Error::ArityMismatch(self.n, chi.len()));
        }
        if let Some(i) = chi.iter().position(|c| c.is_zero()) {
            return Err(Error::ZeroCoordinate(i));
        }
        if let Some(c) = chi.iter().find(|c| c.p() != self.p) {
            return Err(Error::MixedPrime(self.p, c.p()));
        }
        let mut total = QuadScalar::zero(self.p);
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in chi.iter().zip(&e.0) {
                if k != 0 {
                    term = &term * &x.pow(k)?;
                }
            }
            total += &term;
        }
        Ok(total)
    }

    /// Weyl action by variable substitution `x_i -> x_{w(i)}`.
    pub fn act(&self, w: &Permutation) -> Self {
        assert_eq!(w.len(), self.n, "permutation size");
        Self {
            n: self.n,
            p: self.p,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.permuted(w), c.clone()))
                .collect(),
        }
    }

    /// True when no exponent is negative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(ExpVec::is_nonnegative)
    }

    /// Exact division of polynomials (no negative exponents) by lex-leading terms.
    ///
    /// Fails with [`Error::InexactDivision`] if a remainder is left over.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        self.compatible(divisor)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !self.is_polynomial() || !divisor.is_polynomial() {
            return Err(Error::InexactDivision);
        }
        let (lead_e, lead_c) = divisor.leading().expect("nonzero divisor");
        let lead_inv = lead_c.inv()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n, self.p);
        while let Some((e, c)) = rem.leading() {
            let shift = e.minus(lead_e);
            if !shift.is_nonnegative() {
                return Err(Error::InexactDivision);
            }
            let factor = c * &lead_inv;
            rem = &rem - &divisor.shift(&shift).scale(&factor);
            quot.add_term(shift, factor);
        }
        Ok(quot)
    }

    /// Every coefficient lies in Q.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(QuadScalar::is_rational)
    }

    /// Canonical text form, leading (lex-greatest) term first.
    pub fn render(&self) -> String {
        render_terms(self.terms.iter().rev().map(|(e, c)| (e, c.to_text())))
    }

    /// Like [`render`](Self::render), but a common factor `s = sqrt p` is pulled
    /// out front when every coefficient is a rational multiple of `s`.
    pub fn render_factored(&self) -> String {
        if self.is_zero()
            || self
                .terms
                .values()
                .any(|c| !c.a().eq(&num_traits::Zero::zero()))
        {
            return self.render();
        }
        let inner = render_terms(self.terms.iter().rev().map(|(e, c)| {
            let r = QuadScalar::from_rat(c.b().clone(), self.p);
            (e, r.to_text())
        }));
        if self.terms.len() == 1 && inner.starts_with('-') {
            format!("-s*{}", paren_if_sum(&inner[1..]))
        } else {
            format!("s*{}", paren_if_sum(&inner))
        }
    }
}

fn paren_if_sum(s: &str) -> String {
    if s.contains(" + ") || s.contains(" - ") || s.contains('/') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

fn monomial_text(e: &ExpVec) -> String {
    e.0.iter()
        .enumerate()
        .filter(|(_, &k)| k != 0)
        .map(|(i, &k)| {
            if k == 1 {
                format!("x{}", i + 1)
            } else {
                format!("x{}^{}", i + 1, k)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn render_terms<'a>(terms: impl Iterator<Item = (&'a ExpVec, String)>) -> String {
    let mut out = String::new();
    for (idx, (e, coeff)) in terms.enumerate() {
        let mono = monomial_text(e);
        // split the sign off so terms join with " + " / " - "
        let compound = coeff.len() > 1 && coeff[1..].contains(['+', '-']);
        let (neg, body) = if !compound && coeff.starts_with('-') {
            (true, coeff[1..].to_string())
        } else {
            (false, coeff)
        };
        let body = if compound || body.contains('/') {
            format!("({body})")
        } else {
            body
        };
        let term = match (mono.is_empty(), body.as_str()) {
            (true, _) => body.clone(),
            (false, "1") => mono,
            (false, _) => format!("{body}*{mono}"),
        };
        match (idx, neg) {
            (0, false) => out.push_str(&term),
            (0, true) => {
                out.push('-');
                out.push_str(&term);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&term);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&term);
            }
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            exp: &'a ExpVec,
            coeff: &'a QuadScalar,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .rev()
            .map(|(exp, coeff)| Term { exp, coeff })
            .collect();
        let mut st = serializer.serialize_struct("LaurentPoly", 1)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

macro_rules! poly_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&LaurentPoly> for &LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: &LaurentPoly) -> LaurentPoly {
                self.$try(rhs)
                    .expect(concat!("LaurentPoly::", stringify!($method)))
            }
        }
        impl $trait<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-QuadScalar::one(self.p))
    }
}
