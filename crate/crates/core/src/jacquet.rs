//! Jacquet modules at the level of torus characters: the M_0-module
//! `r(W(I,K))` computed from the quotient `A / J`, and the multiset
//! `r(Ind chi) = sum_w w(chi)` it is compared against.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hecke::{spherical_eigenvalue, HeckeElement};
use crate::laurent::{ExpVec, LaurentPoly};
use crate::quotient::{
    build_quotient, composition_factors, factor_list, is_regular, joint_eigencharacters,
    maximal_ideal_generators, orbit, quotient_by_relations, FactorEntry, OrbitPoint,
};
use crate::scalars::{half_power, rat_pow, QuadScalar};
use crate::symfun::Partition;
use crate::weyl::{doubled_rho_pairing, factorial};

/// A character of the diagonal torus trivial on its maximal compact subgroup.
pub type UnramifiedCharacter = OrbitPoint;

pub type CharacterMultiset = BTreeMap<UnramifiedCharacter, usize>;

/// `delta_0(diag(p^a)) = p^{-sum_i (n+1-2i) a_i}` for the upper triangular Borel.
pub fn modular_character(a: &ExpVec, p: u64) -> QuadScalar {
    QuadScalar::from_rat(rat_pow(p, -doubled_rho_pairing(&a.0)), p)
}

/// `delta_0^{1/2}(diag(p^a))`.
pub fn modular_character_half(a: &ExpVec, p: u64) -> QuadScalar {
    half_power(p, -doubled_rho_pairing(&a.0))
}

/// `nu_i = p^{-(n+1-2i)/2}`, so that `delta_0^{1/2}(diag(p^a)) = prod nu_i^{a_i}`.
pub fn half_modulus_coords(n: usize, p: u64) -> Vec<QuadScalar> {
    (0..n)
        .map(|i| half_power(p, -(n as i64 - 1 - 2 * i as i64)))
        .collect()
}

/// `x^a -> delta_0^{1/2}(a) x^a`, the substitution `x_i -> nu_i x_i`.
pub fn twist_by_half_modulus(f: &LaurentPoly) -> LaurentPoly {
    let mut out = LaurentPoly::zero(f.arity(), f.p());
    for (e, c) in f.terms() {
        out.add_term(e.clone(), c * &modular_character_half(e, f.p()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Constant terms of `I` generate `J = tau(m) A`, and `M_0` acts by
    /// `delta_0^{1/2}`-twisted translation.
    #[default]
    Twisted,
    /// `A / mA` under plain translation.
    Untwisted,
}

/// The composition factors of the Jacquet module of `W(I,K)` for the
/// maximal ideal `I` attached to the orbit of `chi`, with multiplicity.
pub fn jacquet_of_w_module(
    chi: &OrbitPoint,
    p: u64,
    norm: Normalization,
) -> Result<CharacterMultiset> {
    let o = orbit(chi);
    match norm {
        Normalization::Untwisted => composition_factors(&build_quotient(chi, p)?, &o),
        Normalization::Twisted => {
            let n = chi.n();
            if chi.p() != p {
                return Err(Error::MixedPrime(p, chi.p()));
            }
            let nu = half_modulus_coords(n, p);
            let generators: Vec<LaurentPoly> = maximal_ideal_generators(chi)?
                .iter()
                .map(twist_by_half_modulus)
                .collect();
            // nu_i x_i is a root of prod_k (T - chi_k) modulo J
            let roots: Vec<Vec<QuadScalar>> = nu
                .iter()
                .map(|v| {
                    let inv = v.inv().expect("nu is a power of p");
                    chi.coords().iter().map(|c| c * &inv).collect()
                })
                .collect();
            let q = quotient_by_relations(&roots, &generators, p, factorial(n))?;
            let ops: Vec<_> = q
                .mult_ops
                .iter()
                .zip(&nu)
                .map(|(m, v)| m.scale(v))
                .collect();
            joint_eigencharacters(&ops, o.points())
        }
    }
}

/// `r(Ind chi') = sum_{w in W} w(chi')`; a point with stabilizer of order
/// `s` is counted `s` times.
pub fn jacquet_of_principal_series(chi: &UnramifiedCharacter) -> CharacterMultiset {
    let o = orbit(chi);
    let mult = factorial(chi.n()) / o.size();
    o.points().iter().map(|x| (x.clone(), mult)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacquetReport {
    pub chi: OrbitPoint,
    pub regular: bool,
    pub w_module_factors: Vec<FactorEntry>,
    pub principal_series_factors: Vec<FactorEntry>,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// Both multisets for `chi`, whether or not its orbit is regular.
pub fn jacquet_report(chi: &OrbitPoint, p: u64) -> Result<JacquetReport> {
    let w_module = jacquet_of_w_module(chi, p, Normalization::Twisted)?;
    let principal = jacquet_of_principal_series(chi);
    Ok(JacquetReport {
        chi: chi.clone(),
        regular: is_regular(&orbit(chi)),
        matches: w_module == principal,
        w_module_factors: factor_list(&w_module),
        principal_series_factors: factor_list(&principal),
    })
}

/// For regular `chi`: `r(W(I,K))` and `r(Ind chi)` have the same
/// composition factors, exactly.
pub fn verify_jacquet_match(chi: &OrbitPoint, p: u64) -> Result<JacquetReport> {
    if !is_regular(&orbit(chi)) {
        return Err(Error::NotRegular);
    }
    jacquet_report(chi, p)
}

/// Whether `T -> eigenvalue(T, chi)` is multiplicative on products of
/// `T_lambda` with parts in `{0, 1}` and their pairwise products, so that it
/// cuts out a one-dimensional quotient of the Hecke algebra.
pub fn k_invariants_dimension_check(chi: &OrbitPoint, p: u64) -> Result<bool> {
    let n = chi.n();
    let eigen = |h: &HeckeElement| h.eigenvalue(chi.coords());
    if !eigen(&HeckeElement::identity(n, p))?.is_one() {
        return Ok(false);
    }
    let basis: Vec<Partition> = Partition::all_in_box(n, 0, 1);
    for (a, b) in basis
        .iter()
        .tuple_combinations::<(_, _)>()
        .chain(basis.iter().map(|a| (a, a)))
    {
        let prod = HeckeElement::basis(a, p).multiply(&HeckeElement::basis(b, p))?;
        let lhs = eigen(&prod)?;
        let rhs =
            &spherical_eigenvalue(a, chi.coords(), p)? * &spherical_eigenvalue(b, chi.coords(), p)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
