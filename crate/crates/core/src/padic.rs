//! Brute-force p-adic oracle for GL_n(Q_p) with K = GL_n(Z_p).
//!
//! Matrices have entries in Z[1/p] and are handled exactly. Everything here
//! is enumeration: Cartan invariants by Smith-style reduction, right coset
//! decompositions of `K p^lambda K`, convolution structure constants by
//! counting, and the constant term integral along the upper unipotent
//! radical. It exists to certify the polynomial side at small scale.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laurent::ExpVec;
use crate::scalars::{check_prime, p_valuation, rat, rat_pow, Rat};
use crate::symfun::Partition;

/// Largest `lambda_1 - lambda_n` accepted by the public enumeration entry points.
pub fn spread_bound(n: usize) -> Option<i64> {
    match n {
        2 => Some(3),
        3 => Some(2),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicMatrix {
    p: u64,
    rows: Vec<Vec<Rat>>,
}

impl PAdicMatrix {
    /// Validates squareness, entries in Z[1/p] and invertibility.
    pub fn new(p: u64, rows: Vec<Vec<Rat>>) -> Result<Self> {
        check_prime(p)?;
        let n = rows.len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::ArityMismatch(n, row.len()));
            }
            for x in row {
                if !denominator_is_p_power(x, p) {
                    return Err(Error::NotPIntegral(x.to_string()));
                }
            }
        }
        let m = Self { p, rows };
        if m.det().is_zero() {
            return Err(Error::Singular);
        }
        Ok(m)
    }

    fn raw(p: u64, rows: Vec<Vec<Rat>>) -> Self {
        Self { p, rows }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        Self::diag_powers(&vec![0; n], p)
    }

    /// `diag(p^{e_1}, .., p^{e_n})`.
    pub fn diag_powers(e: &[i64], p: u64) -> Self {
        let n = e.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            rat_pow(p, e[i])
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::raw(p, rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| &self.rows[i][k] * &other.rows[k][j]).sum())
                    .collect()
            })
            .collect();
        Self::raw(self.p, rows)
    }

    pub fn det(&self) -> Rat {
        let n = self.n();
        let mut a = self.rows.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Rat::zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= &a[col][col];
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse over Q.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n();
        let mut a = self.rows.clone();
        let mut inv = Self::identity(n, self.p).rows;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::Singular)?;
            a.swap(piv, col);
            inv.swap(piv, col);
            let s = a[col][col].recip();
            for c in 0..n {
                a[col][c] *= &s;
                inv[col][c] *= &s;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let x = &f * &a[col][c];
                    a[r][c] -= x;
                    let y = &f * &inv[col][c];
                    inv[r][c] -= y;
                }
            }
        }
        Ok(Self::raw(self.p, inv))
    }

    /// All entries lie in Z_p.
    pub fn is_integral(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|x| p_valuation(x, self.p).is_none_or(|v| v >= 0))
    }

    /// Membership in `K = GL_n(Z_p)`.
    pub fn in_maximal_compact(&self) -> bool {
        self.is_integral() && p_valuation(&self.det(), self.p) == Some(0)
    }
}

impl fmt::Display for PAdicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

fn denominator_is_p_power(x: &Rat, p: u64) -> bool {
    let mut d = x.denom().clone();
    let p = BigInt::from(p);
    while (&d % &p).is_zero() {
        d /= &p;
    }
    d.is_one()
}

/// Elementary divisor valuations of `m` over Z_p, weakly decreasing.
///
/// Reduction over the localisation Z_(p), which has the same elementary
/// divisors as Z_p: pivot on an entry of minimal valuation, clear its row and
/// column with multipliers of nonnegative valuation, recurse.
pub fn cartan_invariants(m: &PAdicMatrix) -> Result<Partition> {
    let n = m.n();
    let p = m.p;
    let mut a = m.rows.clone();
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..n {
            for j in k..n {
                if let Some(v) = p_valuation(&a[i][j], p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (v, i, j) = best.ok_or(Error::Singular)?;
        a.swap(k, i);
        for row in a.iter_mut() {
            row.swap(k, j);
        }
        let pivot = a[k][k].clone();
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &pivot;
            for c in k..n {
                let x = &f * &a[k][c];
                a[r][c] -= x;
            }
        }
        // column k is now zero below the pivot, so clearing row k by column
        // operations leaves the trailing block untouched
        vals.push(v);
    }
    vals.sort_unstable_by(|x, y| y.cmp(x));
    Partition::new(vals)
}

fn check_bounds(lambda: &Partition) -> Result<()> {
    let n = lambda.len();
    let Some(bound) = spread_bound(n) else {
        return Err(Error::Bounds(format!(
            "n = {n}; enumeration supports n = 2 or 3"
        )));
    };
    if lambda.first() - lambda.last() > bound {
        return Err(Error::Bounds(format!(
            "{lambda} has spread {} > {bound} for n = {n}",
            lambda.first() - lambda.last()
        )));
    }
    Ok(())
}

/// Right coset representatives `K p^lambda K = disjoint union of K c_j`,
/// for `n` in {2, 3} within [`spread_bound`].
///
/// Representatives are row-Hermite forms: upper triangular with diagonal
/// `p^{d_i}` and the entries above the diagonal in column `j` running over
/// `0 .. p^{d_j}`, filtered by Cartan invariants. The result is checked to be
/// irredundant: `c c'^{-1}` is never in `K` for distinct representatives.
pub fn right_coset_reps(lambda: &Partition, p: u64) -> Result<Vec<PAdicMatrix>> {
    check_prime(p)?;
    check_bounds(lambda)?;
    let reps = enumerate_right_cosets(lambda, p)?;
    let inverses = reps
        .iter()
        .map(PAdicMatrix::inverse)
        .collect::<Result<Vec<_>>>()?;
    for (i, j) in (0..reps.len()).tuple_combinations() {
        if reps[i].mul(&inverses[j]).in_maximal_compact() {
            return Err(Error::Internal(format!(
                "representatives {} and {} lie in the same coset",
                reps[i], reps[j]
            )));
        }
    }
    Ok(reps)
}

/// The enumeration behind [`right_coset_reps`], without the spread bound or
/// the pairwise redundancy check.
pub fn enumerate_right_cosets(lambda: &Partition, p: u64) -> Result<Vec<PAdicMatrix>> {
    check_prime(p)?;
    let n = lambda.len();
    let shift = lambda.last();
    let base = lambda.shifted(-shift);
    let total = base.size();
    let top = base.first();
    let mut out = Vec::new();
    for diag in (0..n).map(|_| 0..=top).multi_cartesian_product() {
        if diag.iter().sum::<i64>() != total {
            continue;
        }
        // slots above the diagonal, column j has j of them with p^{d_j} choices
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let ranges: Vec<std::ops::Range<u64>> = slots
            .iter()
            .map(|&(_, j)| 0..(p.pow(diag[j] as u32)))
            .collect();
        let fill = |values: &[u64]| {
            let mut rows = PAdicMatrix::diag_powers(&diag, p).rows;
            for (&(i, j), &v) in slots.iter().zip(values) {
                rows[i][j] = rat(v as i64);
            }
            PAdicMatrix::raw(p, rows)
        };
        let candidates: Vec<PAdicMatrix> = if slots.is_empty() {
            vec![fill(&[])]
        } else {
            ranges
                .into_iter()
                .multi_cartesian_product()
                .map(|v| fill(&v))
                .collect()
        };
        let kept: Vec<PAdicMatrix> = candidates
            .into_par_iter()
            .filter(|m| cartan_invariants(m).is_ok_and(|c| c == base))
            .collect();
        out.extend(kept);
    }
    let scale = rat_pow(p, shift);
    Ok(out
        .into_iter()
        .map(|m| {
            let rows = m
                .rows
                .into_iter()
                .map(|r| r.into_iter().map(|x| x * &scale).collect())
                .collect();
            PAdicMatrix::raw(p, rows)
        })
        .collect())
}

/// Number of right cosets in `K p^lambda K` (no bounds enforced).
pub fn coset_degree(lambda: &Partition, p: u64) -> Result<u64> {
    Ok(enumerate_right_cosets(lambda, p)?.len() as u64)
}

/// Structure constants of `1_{K lambda K} * 1_{K mu K} = sum_nu c^nu 1_{K nu K}`
/// with `vol(K) = 1`.
///
/// With `K mu K = disjoint union of K c_j`, the product evaluated at `p^nu`
/// is `#{ j : p^nu c_j^{-1} in K lambda K }`. The left-coset variant is wrong:
/// the middle `K` only cancels against right cosets. The mass identity
/// `deg(lambda) deg(mu) = sum_nu c^nu deg(nu)` is verified before returning.
pub fn convolve_oracle(
    lambda: &Partition,
    mu: &Partition,
    p: u64,
) -> Result<BTreeMap<Partition, u64>> {
    if lambda.len() != mu.len() {
        return Err(Error::ArityMismatch(lambda.len(), mu.len()));
    }
    check_bounds(lambda)?;
    let reps = right_coset_reps(mu, p)?;
    let deg_lambda = coset_degree(lambda, p)?;
    let inverses = reps
        .iter()
        .map(PAdicMatrix::inverse)
        .collect::<Result<Vec<_>>>()?;
    let n = lambda.len();
    let top = lambda.plus(mu);
    let candidates: Vec<Partition> =
        Partition::all_in_box(n, lambda.last() + mu.last(), lambda.first() + mu.first())
            .into_iter()
            .filter(|nu| top.dominates(nu))
            .collect();
    let counted: Vec<(Partition, u64)> = candidates
        .into_par_iter()
        .map(|nu| {
            let x = PAdicMatrix::diag_powers(nu.parts(), p);
            let mut count = 0;
            for inv in &inverses {
                if cartan_invariants(&x.mul(inv))? == *lambda {
                    count += 1;
                }
            }
            Ok((nu, count))
        })
        .collect::<Result<Vec<_>>>()?;
    let result: BTreeMap<Partition, u64> = counted.into_iter().filter(|(_, c)| *c > 0).collect();

    let mut mass = 0u64;
    for (nu, c) in &result {
        mass += c * coset_degree(nu, p)?;
    }
    if mass != deg_lambda * reps.len() as u64 {
        return Err(Error::Internal(format!(
            "mass identity fails for {lambda} * {mu}: {} * {} != {mass}",
            deg_lambda,
            reps.len()
        )));
    }
    Ok(result)
}

/// Sum of `1_{K p^lambda K}(u(x) diag(p^{a_1}, p^{a_2}))` over `x` running
/// through representatives `j / p^N` of `p^{-N} Z_p / Z_p`.
fn constant_term_sum(lambda: &Partition, a: &ExpVec, p: u64, level: u32) -> Result<u64> {
    let denom = p.pow(level);
    let lo = rat_pow(p, a.0[0]);
    let hi = rat_pow(p, a.0[1]);
    let mut count = 0;
    for j in 0..denom {
        let x = Rat::new(BigInt::from(j), BigInt::from(denom));
        let m = PAdicMatrix::raw(
            p,
            vec![vec![lo.clone(), &x * &hi], vec![Rat::zero(), hi.clone()]],
        );
        if cartan_invariants(&m)? == *lambda {
            count += 1;
        }
    }
    Ok(count)
}

/// Truncation level from which the constant term is guaranteed stable: the
/// integrand vanishes unless `val(x) >= -(lambda_1 - lambda_2)`.
pub fn stable_truncation(lambda: &Partition) -> u32 {
    (lambda.first() - lambda.last()).max(0) as u32
}

/// Constant term `f_P(diag(p^a)) = int_U 1_{K p^lambda K}(u diag(p^a)) du` for
/// GL_2 with the upper unipotent radical, Haar measure giving `U cap K` volume 1.
///
/// Evaluated at truncation `level` and `level + 1`; any disagreement is an
/// error ([`Error::Unstable`] below the guaranteed level, an internal error
/// at or above it).
pub fn constant_term_oracle(lambda: &Partition, a: &ExpVec, p: u64, level: u32) -> Result<Rat> {
    check_prime(p)?;
    if lambda.len() != 2 || a.len() != 2 {
        return Err(Error::Bounds(
            "constant term oracle supports n = 2 only".into(),
        ));
    }
    check_bounds(lambda)?;
    if level < 1 {
        return Err(Error::Bounds("truncation level must be at least 1".into()));
    }
    let lower = constant_term_sum(lambda, a, p, level)?;
    let upper = constant_term_sum(lambda, a, p, level + 1)?;
    if lower != upper {
        if level >= stable_truncation(lambda) {
            return Err(Error::Internal(format!(
                "constant term of {lambda} at {a} unstable beyond level {level}"
            )));
        }
        return Err(Error::Unstable {
            level,
            next: level + 1,
            lower: lower.to_string(),
            upper: upper.to_string(),
        });
    }
    Ok(rat(lower as i64))
}
