//! The Weyl group of the diagonal torus of GL_n, i.e. the symmetric group S_n.

use itertools::Itertools;

use crate::error::{Error, Result};

/// A permutation of `{0, .., n-1}` stored as its image list: `w(i) = images[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::Parse(format!("not a permutation: {images:?}")));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Swaps `i` and `j` (0-based).
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(i, j);
        Self(v)
    }

    /// `i -> i + 1 mod n`.
    pub fn long_cycle(n: usize) -> Self {
        Self((0..n).map(|i| (i + 1) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `(self * other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &w) in self.0.iter().enumerate() {
            inv[w] = i;
        }
        Self(inv)
    }

    pub fn sign(&self) -> i64 {
        let mut sign = 1;
        for (i, j) in (0..self.0.len()).tuple_combinations() {
            if self.0[i] > self.0[j] {
                sign = -sign;
            }
        }
        sign
    }

    /// Left action on tuples: the entry at position `i` moves to `w(i)`.
    pub fn permute<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        let mut out = xs.to_vec();
        for (i, x) in xs.iter().enumerate() {
            out[self.0[i]] = x.clone();
        }
        out
    }
}

/// All `n!` permutations, in lexicographic order of image lists.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    (0..n).permutations(n).map(Permutation).collect()
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// `2 <a, rho> = sum_i (n + 1 - 2i) a_i` for the upper triangular Borel (1-based `i`).
pub fn doubled_rho_pairing(a: &[i64]) -> i64 {
    let n = a.len() as i64;
    a.iter()
        .enumerate()
        .map(|(i, &x)| (n - 1 - 2 * i as i64) * x)
        .sum()
}
