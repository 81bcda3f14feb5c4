//! The invariant subalgebra: elementary and monomial symmetric Laurent
//! polynomials, the Reynolds operator, and Hall-Littlewood polynomials.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{ExpVec, LaurentPoly};
use crate::scalars::{rat_frac, QuadScalar};
use crate::weyl::{all_permutations, factorial, Permutation};

/// A dominant cocharacter of the diagonal torus: a weakly decreasing integer
/// vector, negative parts allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Partition(Vec<i64>);

impl Partition {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.windows(2).all(|w| w[0] >= w[1]) {
            Ok(Self(parts))
        } else {
            Err(Error::NotDominant(parts))
        }
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The fundamental coweight `(1, .., 1, 0, .., 0)` with `i` ones.
    pub fn fundamental(i: usize, n: usize) -> Self {
        Self((0..n).map(|k| i64::from(k < i)).collect())
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn first(&self) -> i64 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn last(&self) -> i64 {
        self.0.last().copied().unwrap_or(0)
    }

    /// `lambda + (c, .., c)`.
    pub fn shifted(&self, c: i64) -> Self {
        Self(self.0.iter().map(|x| x + c).collect())
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn exp(&self) -> ExpVec {
        ExpVec(self.0.clone())
    }

    /// Dominance order: equal size and every partial sum of `self` is at least
    /// the corresponding one of `other`.
    pub fn dominates(&self, other: &Self) -> bool {
        if self.len() != other.len() || self.size() != other.size() {
            return false;
        }
        let mut a = 0;
        let mut b = 0;
        self.0.iter().zip(&other.0).all(|(x, y)| {
            a += x;
            b += y;
            a >= b
        })
    }

    /// Parses `"2,0,-1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad cocharacter {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    /// All dominant cocharacters with `n` parts in `[lo, hi]`.
    pub fn all_in_box(n: usize, lo: i64, hi: i64) -> Vec<Self> {
        fn rec(n: usize, lo: i64, hi: i64, acc: &mut Vec<i64>, out: &mut Vec<Partition>) {
            if acc.len() == n {
                out.push(Partition(acc.clone()));
                return;
            }
            let top = acc.last().copied().unwrap_or(hi);
            for v in (lo..=top).rev() {
                acc.push(v);
                rec(n, lo, hi, acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, lo, hi, &mut Vec::new(), &mut out);
        out
    }

    /// Multiplicities of the distinct parts, zero parts included.
    fn multiplicities(&self) -> Vec<usize> {
        self.0.iter().dedup_with_count().map(|(m, _)| m).collect()
    }
}

impl TryFrom<Vec<i64>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Partition> for Vec<i64> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// `e_i(x_1, .., x_n)`, `1 <= i <= n`.
pub fn elementary_symmetric(i: usize, n: usize, p: u64) -> Result<LaurentPoly> {
    if i == 0 || i > n {
        return Err(Error::OutOfRange { index: i, n });
    }
    let mut f = LaurentPoly::zero(n, p);
    for subset in (0..n).combinations(i) {
        let mut e = vec![0; n];
        for k in subset {
            e[k] = 1;
        }
        f.add_term(ExpVec(e), QuadScalar::one(p));
    }
    Ok(f)
}

/// Sum of the distinct monomials in the orbit of `x^lambda`.
pub fn monomial_symmetric(lambda: &Partition, p: u64) -> LaurentPoly {
    let n = lambda.len();
    let mut f = LaurentPoly::zero(n, p);
    for e in lambda.parts().iter().copied().permutations(n).unique() {
        f.add_term(ExpVec(e), QuadScalar::one(p));
    }
    f
}

/// Reynolds operator `(1/n!) sum_w w.f`.
pub fn symmetrize(f: &LaurentPoly) -> LaurentPoly {
    let n = f.arity();
    let mut acc = LaurentPoly::zero(n, f.p());
    for w in all_permutations(n) {
        acc = &acc + &f.act(&w);
    }
    acc.scale(&QuadScalar::from_rat(
        rat_frac(1, factorial(n) as i64),
        f.p(),
    ))
}

/// Invariance under a transposition and the long cycle, which generate S_n.
pub fn is_invariant(f: &LaurentPoly) -> bool {
    let n = f.arity();
    if n < 2 {
        return true;
    }
    f.act(&Permutation::transposition(n, 0, 1)) == *f && f.act(&Permutation::long_cycle(n)) == *f
}

/// Coefficients of an invariant polynomial in the monomial symmetric basis.
pub fn decompose_m_basis(f: &LaurentPoly) -> Result<BTreeMap<Partition, QuadScalar>> {
    if !is_invariant(f) {
        return Err(Error::NotInvariant);
    }
    let mut rest = f.clone();
    let mut out = BTreeMap::new();
    // the lex-greatest exponent of an invariant polynomial is dominant
    while let Some((e, c)) = rest.leading() {
        let lambda = Partition(e.0.clone());
        let c = c.clone();
        rest = &rest - &monomial_symmetric(&lambda, f.p()).scale(&c);
        out.insert(lambda, c);
    }
    Ok(out)
}

/// `[m]_t! = prod_{j=1}^m (1 + t + .. + t^{j-1})`.
fn t_factorial(m: usize, t: &QuadScalar) -> QuadScalar {
    let p = t.p();
    let mut acc = QuadScalar::one(p);
    let mut bracket = QuadScalar::zero(p);
    let mut power = QuadScalar::one(p);
    for _ in 0..m {
        bracket += &power;
        power = &power * t;
        acc = &acc * &bracket;
    }
    acc
}

/// Hall-Littlewood polynomial `P_lambda(x; t)`.
///
/// Computed as `v_lambda(t)^{-1} Delta^{-1} sum_w sgn(w) w(x^lambda prod_{i<j}(x_i - t x_j))`
/// with `Delta = prod_{i<j}(x_i - x_j)`; the division by `Delta` is exact.
/// Negative parts are handled by `P_{lambda + c} = (x_1..x_n)^c P_lambda`.
pub fn hall_littlewood(lambda: &Partition, t: &QuadScalar) -> Result<LaurentPoly> {
    let n = lambda.len();
    let p = t.p();
    let c = lambda.last();
    let base = lambda.shifted(-c);

    let v = base
        .multiplicities()
        .into_iter()
        .fold(QuadScalar::one(p), |acc, m| &acc * &t_factorial(m, t));
    if v.is_zero() {
        return Err(Error::DegenerateParameter);
    }

    let mut kernel = LaurentPoly::monomial(base.exp(), QuadScalar::one(p));
    let mut vandermonde = LaurentPoly::one(n, p);
    for (i, j) in (0..n).tuple_combinations() {
        let xi = LaurentPoly::var(n, i, p);
        let xj = LaurentPoly::var(n, j, p);
        kernel = &kernel * &(&xi - &xj.scale(t));
        vandermonde = &vandermonde * &(&xi - &xj);
    }

    let mut numerator = LaurentPoly::zero(n, p);
    for w in all_permutations(n) {
        let term = kernel.act(&w);
        numerator = if w.sign() > 0 {
            &numerator + &term
        } else {
            &numerator - &term
        };
    }
    let symmetric = numerator.div_exact(&vandermonde).map_err(|e| match e {
        Error::InexactDivision => {
            Error::Internal("alternant not divisible by the Vandermonde product".into())
        }
        other => other,
    })?;
    Ok(symmetric.scale(&v.inv()?).shift(&ExpVec(vec![c; n])))
}
