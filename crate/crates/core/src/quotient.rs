//! Maximal ideals of the invariant ring as W-orbits of unramified
//! characters, and the finite-dimensional quotient `A / mA` of the Laurent
//! ring `A` by the ideal generated by such a maximal ideal.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{ExpVec, LaurentPoly};
use crate::linalg::{generalized_kernel_power, joint_kernel_dim, Matrix, SparseEchelon, SparseVec};
use crate::scalars::QuadScalar;
use crate::symfun::elementary_symmetric;
use crate::weyl::{all_permutations, factorial, Permutation};

/// A point of the torus `(Q(sqrt p)^x)^n`: the unramified character
/// `diag(p^a) -> prod coords_i^{a_i}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbitPoint {
    coords: Vec<QuadScalar>,
}

impl OrbitPoint {
    pub fn new(coords: Vec<QuadScalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parse("empty character".into()));
        }
        let p = coords[0].p();
        for (i, c) in coords.iter().enumerate() {
            if c.p() != p {
                return Err(Error::MixedPrime(p, c.p()));
            }
            if c.is_zero() {
                return Err(Error::ZeroCoordinate(i));
            }
        }
        Ok(Self { coords })
    }

    /// Comma-separated scalars in the `a/b+c/d*s` grammar.
    pub fn parse(text: &str, p: u64) -> Result<Self> {
        let coords = text
            .split(',')
            .map(|t| QuadScalar::parse(t.trim(), p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    pub fn from_ints(xs: &[i64], p: u64) -> Result<Self> {
        Self::new(xs.iter().map(|&x| QuadScalar::from_int(x, p)).collect())
    }

    pub fn coords(&self) -> &[QuadScalar] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn p(&self) -> u64 {
        self.coords[0].p()
    }

    pub fn permuted(&self, w: &Permutation) -> Self {
        Self {
            coords: w.permute(&self.coords),
        }
    }

    /// Coordinatewise product with another character.
    pub fn twisted(&self, nu: &[QuadScalar]) -> Self {
        assert_eq!(nu.len(), self.n());
        Self {
            coords: self.coords.iter().zip(nu).map(|(c, v)| c * v).collect(),
        }
    }

    pub fn has_distinct_coords(&self) -> bool {
        self.coords.iter().all_unique()
    }
}

impl fmt::Display for OrbitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.coords.iter().map(QuadScalar::to_text).join(",")
        )
    }
}

/// Integer coordinates serialize as JSON numbers, everything else as text.
impl Serialize for OrbitPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            if c.is_rational() && c.a().is_integer() {
                match i64::try_from(c.a().to_integer()) {
                    Ok(v) => seq.serialize_element(&v)?,
                    Err(_) => seq.serialize_element(&c.to_text())?,
                }
            } else {
                seq.serialize_element(&c.to_text())?;
            }
        }
        seq.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WOrbit {
    points: Vec<OrbitPoint>,
}

impl WOrbit {
    pub fn points(&self) -> &[OrbitPoint] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    pub fn contains(&self, x: &OrbitPoint) -> bool {
        self.points.binary_search(x).is_ok()
    }
}

pub fn orbit(chi: &OrbitPoint) -> WOrbit {
    let points: BTreeSet<OrbitPoint> = all_permutations(chi.n())
        .iter()
        .map(|w| chi.permuted(w))
        .collect();
    WOrbit {
        points: points.into_iter().collect(),
    }
}

pub fn is_regular(o: &WOrbit) -> bool {
    o.size() == factorial(o.n())
}

/// `A / mA` with the action of the coordinate functions.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientModule {
    pub n: usize,
    pub p: u64,
    pub dim: usize,
    pub mult_ops: Vec<Matrix>,
    pub basis_tags: Vec<String>,
}

impl QuotientModule {
    pub fn ops_commute(&self) -> bool {
        self.mult_ops
            .iter()
            .tuple_combinations()
            .all(|(a, b)| a.commutes_with(b))
    }

    pub fn ops_invertible(&self) -> bool {
        self.mult_ops.iter().all(Matrix::is_invertible)
    }

    /// Evaluates a polynomial (nonnegative exponents) on the commuting operators.
    pub fn eval_polynomial(&self, f: &LaurentPoly) -> Result<Matrix> {
        if f.arity() != self.n {
            return Err(Error::ArityMismatch(self.n, f.arity()));
        }
        if !f.is_polynomial() {
            return Err(Error::Bounds(
                "negative exponent in operator polynomial".into(),
            ));
        }
        let mut acc = Matrix::zero(self.dim, self.p);
        for (e, c) in f.terms() {
            let mut term = Matrix::scalar(self.dim, c);
            for (m, &k) in self.mult_ops.iter().zip(&e.0) {
                term = term.mul(&m.pow(k as u32));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

/// `prod_k (T - r_k)` reduction tables for `T^k`, `k` of either sign.
struct PowerTable {
    /// `c_0 .. c_{d-1}` with the polynomial `T^d + sum c_k T^k`.
    lower: Vec<QuadScalar>,
    pos: Vec<Vec<QuadScalar>>,
    neg: Vec<Vec<QuadScalar>>,
}

impl PowerTable {
    fn new(roots: &[QuadScalar], p: u64) -> Self {
        let mut poly = vec![QuadScalar::one(p)];
        for r in roots {
            // multiply by (T - r); poly[k] is the coefficient of T^k
            let mut next = vec![QuadScalar::zero(p); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= &(c * r);
            }
            poly = next;
        }
        let d = roots.len();
        let mut unit = vec![QuadScalar::zero(p); d];
        unit[0] = QuadScalar::one(p);
        Self {
            lower: poly[..d].to_vec(),
            pos: vec![unit],
            neg: Vec::new(),
        }
    }

    fn times_t(&self, v: &[QuadScalar]) -> Vec<QuadScalar> {
        let d = v.len();
        let top = v[d - 1].clone();
        let mut out = Vec::with_capacity(d);
        out.push(QuadScalar::zero(top.p()));
        out.extend_from_slice(&v[..d - 1]);
        if !top.is_zero() {
            for (o, c) in out.iter_mut().zip(&self.lower) {
                *o -= &(&top * c);
            }
        }
        out
    }

    fn times_t_inverse(&self, v: &[QuadScalar]) -> Vec<QuadScalar> {
        // T^{-1} = -(1/c_0) (T^{d-1} + c_{d-1} T^{d-2} + .. + c_1)
        let d = v.len();
        let mut out: Vec<QuadScalar> = v[1..].to_vec();
        out.push(QuadScalar::zero(v[0].p()));
        if !v[0].is_zero() {
            let f = -(&v[0] * &self.lower[0].inv().expect("roots are nonzero"));
            for k in 0..d {
                let c = if k + 1 < d {
                    &self.lower[k + 1] * &f
                } else {
                    f.clone()
                };
                out[k] += &c;
            }
        }
        out
    }

    fn power(&mut self, k: i64) -> &[QuadScalar] {
        if k >= 0 {
            let k = k as usize;
            while self.pos.len() <= k {
                let next = self.times_t(self.pos.last().expect("nonempty"));
                self.pos.push(next);
            }
            &self.pos[k]
        } else {
            let k = (-k) as usize;
            while self.neg.len() < k {
                let prev = self.neg.last().unwrap_or(&self.pos[0]);
                let next = self.times_t_inverse(prev);
                self.neg.push(next);
            }
            &self.neg[k - 1]
        }
    }
}

/// The tensor algebra `Q_0 = (x) Q(sqrt p)[T] / prod_k (T - r_ik)` with its
/// monomial basis ordered by total degree, then lexicographically.
struct TensorAlgebra {
    n: usize,
    d: usize,
    p: u64,
    tables: Vec<PowerTable>,
    /// exponent vectors in column order
    monomials: Vec<Vec<i64>>,
    /// mixed-radix index -> column
    column_of: Vec<usize>,
}

impl TensorAlgebra {
    fn new(roots: &[Vec<QuadScalar>], p: u64) -> Self {
        let n = roots.len();
        let d = roots[0].len();
        let mut monomials: Vec<Vec<i64>> = (0..n)
            .map(|_| 0..d as i64)
            .multi_cartesian_product()
            .collect();
        monomials.sort_by(|a, b| {
            let (sa, sb): (i64, i64) = (a.iter().sum(), b.iter().sum());
            sa.cmp(&sb).then_with(|| a.cmp(b))
        });
        let mut column_of = vec![0; monomials.len()];
        for (col, m) in monomials.iter().enumerate() {
            column_of[Self::radix_index(m, d)] = col;
        }
        Self {
            n,
            d,
            p,
            tables: roots.iter().map(|r| PowerTable::new(r, p)).collect(),
            monomials,
            column_of,
        }
    }

    fn radix_index(e: &[i64], d: usize) -> usize {
        e.iter().rev().fold(0, |acc, &k| acc * d + k as usize)
    }

    fn dim(&self) -> usize {
        self.monomials.len()
    }

    /// Coordinates of `c x^e` in `Q_0`, accumulated into `acc`.
    fn add_monomial(&mut self, e: &[i64], c: &QuadScalar, acc: &mut SparseVec) {
        let mut partial: Vec<(usize, QuadScalar)> = vec![(0, c.clone())];
        let mut stride = 1;
        for i in 0..self.n {
            let v = self.tables[i].power(e[i]).to_vec();
            let mut next = Vec::with_capacity(partial.len() * self.d);
            for (idx, x) in &partial {
                for (k, y) in v.iter().enumerate() {
                    if !y.is_zero() {
                        next.push((idx + k * stride, x * y));
                    }
                }
            }
            partial = next;
            stride *= self.d;
        }
        for (idx, x) in partial {
            let col = self.column_of[idx];
            let entry = acc.entry(col).or_insert_with(|| QuadScalar::zero(self.p));
            *entry += &x;
            if entry.is_zero() {
                acc.remove(&col);
            }
        }
    }

    fn image(&mut self, f: &LaurentPoly, shift: &[i64]) -> SparseVec {
        let mut acc = SparseVec::new();
        for (e, c) in f.terms() {
            let moved: Vec<i64> = e.0.iter().zip(shift).map(|(a, b)| a + b).collect();
            self.add_monomial(&moved, c, &mut acc);
        }
        acc
    }
}

/// Quotient of `A` by the ideal generated by `generators`, where variable
/// `i` is known to satisfy `prod_k (x_i - roots[i][k]) = 0` modulo that
/// ideal. The result must have dimension `expected_dim`.
pub fn quotient_by_relations(
    roots: &[Vec<QuadScalar>],
    generators: &[LaurentPoly],
    p: u64,
    expected_dim: usize,
) -> Result<QuotientModule> {
    let n = roots.len();
    for r in roots.iter().flatten() {
        if r.is_zero() {
            return Err(Error::ZeroCoordinate(0));
        }
    }
    let mut q0 = TensorAlgebra::new(roots, p);
    let mut echelon = SparseEchelon::new();
    let monomials = q0.monomials.clone();
    for g in generators {
        if g.arity() != n {
            return Err(Error::ArityMismatch(n, g.arity()));
        }
        for m in &monomials {
            let v = q0.image(g, m);
            echelon.insert(v);
        }
    }
    let standard: Vec<usize> = (0..q0.dim()).filter(|c| !echelon.is_pivot(*c)).collect();
    let dim = standard.len();
    if dim != expected_dim {
        return Err(Error::Internal(format!(
            "quotient has dimension {dim}, expected {expected_dim}"
        )));
    }
    let position: HashMap<usize, usize> =
        standard.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut mult_ops = Vec::with_capacity(n);
    for i in 0..n {
        let x_i = LaurentPoly::var(n, i, p);
        let cols: Vec<Vec<QuadScalar>> = standard
            .iter()
            .map(|&c| {
                let reduced = echelon.reduce(q0.image(&x_i, &monomials[c]));
                let mut col = vec![QuadScalar::zero(p); dim];
                for (k, x) in reduced {
                    col[position[&k]] = x;
                }
                col
            })
            .collect();
        mult_ops.push(Matrix::from_columns(cols, p));
    }
    let basis_tags = standard
        .iter()
        .map(|&c| LaurentPoly::monomial(ExpVec(monomials[c].clone()), QuadScalar::one(p)).render())
        .collect();
    Ok(QuotientModule {
        n,
        p,
        dim,
        mult_ops,
        basis_tags,
    })
}

/// The generators `e_j(x) - e_j(chi)` of the maximal ideal at the orbit of `chi`.
pub fn maximal_ideal_generators(chi: &OrbitPoint) -> Result<Vec<LaurentPoly>> {
    let (n, p) = (chi.n(), chi.p());
    (1..=n)
        .map(|j| {
            let e = elementary_symmetric(j, n, p)?;
            let value = e.eval(chi.coords())?;
            Ok(&e - &LaurentPoly::constant(n, value))
        })
        .collect()
}

/// `A / mA` for the maximal ideal attached to the orbit of `chi`, `n <= 4`.
pub fn build_quotient(chi: &OrbitPoint, p: u64) -> Result<QuotientModule> {
    let n = chi.n();
    if chi.p() != p {
        return Err(Error::MixedPrime(p, chi.p()));
    }
    if n > 4 {
        return Err(Error::Bounds(format!(
            "quotient construction supports n <= 4, got {n}"
        )));
    }
    let roots = vec![chi.coords().to_vec(); n];
    quotient_by_relations(&roots, &maximal_ideal_generators(chi)?, p, factorial(n))
}

/// Whether `e_j(M_1, .., M_n) = e_j(chi) Id` for every `j`.
pub fn annihilator_check(q: &QuotientModule, chi: &OrbitPoint) -> Result<bool> {
    if chi.n() != q.n {
        return Err(Error::ArityMismatch(q.n, chi.n()));
    }
    for j in 1..=q.n {
        let e = elementary_symmetric(j, q.n, q.p)?;
        let target = Matrix::scalar(q.dim, &e.eval(chi.coords())?);
        if q.eval_polynomial(&e)? != target {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multiplicities of the joint generalized eigencharacters of `ops` among
/// `candidates`; the multiplicities must exhaust the dimension.
pub fn joint_eigencharacters(
    ops: &[Matrix],
    candidates: &[OrbitPoint],
) -> Result<BTreeMap<OrbitPoint, usize>> {
    let dim = ops.first().map_or(0, Matrix::dim);
    // each (operator, eigenvalue) pair is shared by many candidates
    let keys: BTreeSet<(usize, QuadScalar)> = candidates
        .iter()
        .flat_map(|x| x.coords().iter().cloned().enumerate())
        .collect();
    let powered: BTreeMap<(usize, QuadScalar), Matrix> = keys
        .into_par_iter()
        .map(|(i, c)| {
            let m = generalized_kernel_power(&ops[i], &c);
            ((i, c), m)
        })
        .collect();
    let counts: Vec<usize> = candidates
        .par_iter()
        .map(|x| {
            let stack: Vec<&Matrix> = x
                .coords()
                .iter()
                .enumerate()
                .map(|(i, c)| &powered[&(i, c.clone())])
                .collect();
            joint_kernel_dim(&stack)
        })
        .collect();
    let total: usize = counts.iter().sum();
    if total != dim {
        return Err(Error::Internal(format!(
            "eigencharacter multiplicities sum to {total}, dimension is {dim}"
        )));
    }
    Ok(candidates
        .iter()
        .cloned()
        .zip(counts)
        .filter(|(_, m)| *m > 0)
        .collect())
}

/// Composition factors `A/m_w` of `A / mA` with their multiplicities.
pub fn composition_factors(q: &QuotientModule, o: &WOrbit) -> Result<BTreeMap<OrbitPoint, usize>> {
    if o.n() != q.n {
        return Err(Error::ArityMismatch(q.n, o.n()));
    }
    joint_eigencharacters(&q.mult_ops, o.points())
}

/// A factor multiset as a JSON-friendly list.
pub fn factor_list(factors: &BTreeMap<OrbitPoint, usize>) -> Vec<FactorEntry> {
    factors
        .iter()
        .map(|(c, &m)| FactorEntry {
            character: c.clone(),
            multiplicity: m,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorEntry {
    pub character: OrbitPoint,
    pub multiplicity: usize,
}
