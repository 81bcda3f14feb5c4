//! Exact linear algebra over `Q(sqrt p)`: dense square matrices for the
//! multiplication operators, and an incremental sparse echelon form for
//! quotienting by large relation spans.

use std::collections::{BTreeMap, HashMap};

use serde::ser::{Serialize, Serializer};

use crate::scalars::QuadScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    p: u64,
    rows: Vec<Vec<QuadScalar>>,
}

impl Matrix {
    pub fn zero(dim: usize, p: u64) -> Self {
        Self {
            p,
            rows: vec![vec![QuadScalar::zero(p); dim]; dim],
        }
    }

    pub fn identity(dim: usize, p: u64) -> Self {
        Self::scalar(dim, &QuadScalar::one(p))
    }

    pub fn scalar(dim: usize, c: &QuadScalar) -> Self {
        let mut m = Self::zero(dim, c.p());
        for i in 0..dim {
            m.rows[i][i] = c.clone();
        }
        m
    }

    /// Builds from columns: `cols[j]` is the image of the `j`-th basis vector.
    pub fn from_columns(cols: Vec<Vec<QuadScalar>>, p: u64) -> Self {
        let dim = cols.len();
        let mut m = Self::zero(dim, p);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), dim);
            for (i, x) in col.into_iter().enumerate() {
                m.rows[i][j] = x;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> &[Vec<QuadScalar>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &QuadScalar {
        &self.rows[i][j]
    }

    pub fn trace(&self) -> QuadScalar {
        let mut t = QuadScalar::zero(self.p);
        for i in 0..self.dim() {
            t += &self.rows[i][i];
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(&QuadScalar, &QuadScalar) -> QuadScalar) -> Self {
        assert_eq!(self.dim(), other.dim());
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
            .collect();
        Self { p: self.p, rows }
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|a| a * c).collect())
            .collect();
        Self { p: self.p, rows }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.dim();
        assert_eq!(d, other.dim());
        let mut out = Self::zero(d, self.p);
        for i in 0..d {
            for (k, a) in self.rows[i].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    if !other.rows[k][j].is_zero() {
                        out.rows[i][j] += &(a * &other.rows[k][j]);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim(), self.p);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul(other) == other.mul(self)
    }

    pub fn det(&self) -> QuadScalar {
        let mut a = self.rows.clone();
        let d = a.len();
        let mut det = QuadScalar::one(self.p);
        for c in 0..d {
            let Some(piv) = (c..d).find(|&r| !a[r][c].is_zero()) else {
                return QuadScalar::zero(self.p);
            };
            if piv != c {
                a.swap(piv, c);
                det = -det;
            }
            det = &det * &a[c][c];
            let inv = a[c][c].inv().expect("nonzero pivot");
            for r in c + 1..d {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..d {
                    let delta = &f * &a[c][k];
                    a[r][k] -= &delta;
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(QuadScalar::to_text).collect())
            .collect();
        text.serialize(serializer)
    }
}

/// Rank of the matrix whose rows are `rows` (all of equal length).
pub fn rank_of_rows(rows: impl IntoIterator<Item = Vec<QuadScalar>>) -> usize {
    let mut ech = SparseEchelon::new();
    for r in rows {
        let sparse = r
            .into_iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .collect();
        ech.insert(sparse);
    }
    ech.rank()
}

/// Dimension of `ker A_1 ∩ .. ∩ ker A_k`, i.e. the nullity of the stacked matrix.
pub fn joint_kernel_dim(ops: &[&Matrix]) -> usize {
    let Some(first) = ops.first() else {
        return 0;
    };
    let d = first.dim();
    d - rank_of_rows(ops.iter().flat_map(|m| m.rows.iter().cloned()))
}

pub fn rank(m: &Matrix) -> usize {
    rank_of_rows(m.rows.iter().cloned())
}

/// `(M - c)^k` for the least `k` with `rank (M-c)^k = rank (M-c)^{k+1}`.
/// Its kernel is the generalized eigenspace, as for the exponent `dim`.
pub fn generalized_kernel_power(m: &Matrix, c: &QuadScalar) -> Matrix {
    let shift = m.sub(&Matrix::scalar(m.dim(), c));
    let mut power = shift.clone();
    let mut r = rank(&power);
    while r > 0 {
        let next = power.mul(&shift);
        let r_next = rank(&next);
        if r_next == r {
            break;
        }
        power = next;
        r = r_next;
    }
    power
}

/// Dimension of the joint generalized eigenspace `∩ ker (M_j - c_j)^dim`.
pub fn joint_generalized_eigenspace_dim(ops: &[Matrix], eigen: &[QuadScalar]) -> usize {
    assert_eq!(ops.len(), eigen.len());
    let powered: Vec<Matrix> = ops
        .iter()
        .zip(eigen)
        .map(|(m, c)| generalized_kernel_power(m, c))
        .collect();
    joint_kernel_dim(&powered.iter().collect::<Vec<_>>())
}

pub type SparseVec = BTreeMap<usize, QuadScalar>;

/// Row-reduced echelon form built one vector at a time. Every stored row has
/// leading entry 1 at its pivot (its largest column) and zeros in all other
/// pivot columns, so reduction needs one pass.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    rows: HashMap<usize, SparseVec>,
}

impl SparseEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Reduces `v` modulo the span; the result has no pivot-column entries.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let hits: Vec<usize> = v.keys().copied().filter(|c| self.is_pivot(*c)).collect();
        for c in hits {
            let Some(f) = v.get(&c).cloned() else {
                continue;
            };
            for (k, x) in &self.rows[&c] {
                sub_at(&mut v, *k, &(&f * x));
            }
        }
        v
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut v = self.reduce(v);
        let Some((&pivot, lead)) = v.iter().next_back() else {
            return false;
        };
        let inv = lead.inv().expect("nonzero lead");
        for x in v.values_mut() {
            *x = &*x * &inv;
        }
        for row in self.rows.values_mut() {
            if let Some(f) = row.get(&pivot).cloned() {
                for (k, x) in &v {
                    sub_at(row, *k, &(&f * x));
                }
            }
        }
        self.rows.insert(pivot, v);
        true
    }
}

fn sub_at(v: &mut SparseVec, k: usize, x: &QuadScalar) {
    let entry = v.entry(k).or_insert_with(|| QuadScalar::zero(x.p()));
    *entry -= x;
    if entry.is_zero() {
        v.remove(&k);
    }
}
