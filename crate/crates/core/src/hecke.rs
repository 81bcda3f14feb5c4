//! The spherical Hecke algebra `H_K` of GL_n in the double coset basis
//! `T_lambda = 1_{K p^lambda K}`, and the Satake transform to the invariant
//! Laurent polynomials.
//!
//! Multiplication runs on the polynomial side: transform, multiply, and peel
//! the product back into the `T_lambda` basis. The p-adic enumeration in
//! [`crate::padic`] is only used to certify that route.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{ExpVec, LaurentPoly};
use crate::padic;
use crate::scalars::{half_power, rat_frac, QuadScalar};
use crate::symfun::{hall_littlewood, is_invariant, Partition};
use crate::weyl::doubled_rho_pairing;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeElement {
    n: usize,
    p: u64,
    terms: BTreeMap<Partition, QuadScalar>,
}

impl HeckeElement {
    pub fn zero(n: usize, p: u64) -> Self {
        Self {
            n,
            p,
            terms: BTreeMap::new(),
        }
    }

    /// The unit `eps_K = 1_K` (volume of `K` normalised to 1).
    pub fn identity(n: usize, p: u64) -> Self {
        Self::basis(&Partition::zero(n), p)
    }

    pub fn basis(lambda: &Partition, p: u64) -> Self {
        let mut h = Self::zero(lambda.len(), p);
        h.add_term(lambda.clone(), QuadScalar::one(p));
        h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Partition, &QuadScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, lambda: &Partition) -> QuadScalar {
        self.terms
            .get(lambda)
            .cloned()
            .unwrap_or_else(|| QuadScalar::zero(self.p))
    }

    pub fn add_term(&mut self, lambda: Partition, c: QuadScalar) {
        assert_eq!(lambda.len(), self.n);
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(lambda)
            .or_insert_with(|| QuadScalar::zero(c.p()));
        *entry += &c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, c) in &other.terms {
            out.add_term(l.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        let mut out = Self::zero(self.n, self.p);
        for (l, x) in &self.terms {
            out.add_term(l.clone(), x * c);
        }
        out
    }

    /// The Satake transform, extended linearly.
    pub fn satake(&self) -> LaurentPoly {
        let mut f = LaurentPoly::zero(self.n, self.p);
        for (lambda, c) in &self.terms {
            f = &f + &satake_closed_form(lambda, self.p).scale(c);
        }
        f
    }

    /// Convolution product, computed through the Satake isomorphism.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        if self.p != other.p {
            return Err(Error::MixedPrime(self.p, other.p));
        }
        expand_in_satake_basis(&(&self.satake() * &other.satake()), self.p)
    }

    /// The value of the character of `H_K` attached to the orbit of `chi`.
    pub fn eigenvalue(&self, chi: &[QuadScalar]) -> Result<QuadScalar> {
        self.satake().eval(chi)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (lambda, c)) in self.terms.iter().rev().enumerate() {
            let basis = format!("T{lambda}");
            let text = c.to_text();
            let compound = text.len() > 1 && text[1..].contains(['+', '-']);
            let (neg, body) = match text.strip_prefix('-') {
                Some(rest) if !compound => (true, rest.to_string()),
                _ => (false, text.clone()),
            };
            let body = if compound || body.contains('/') {
                format!("({body})")
            } else {
                body
            };
            let term = if body == "1" {
                basis
            } else {
                format!("{body}*{basis}")
            };
            let sep = match (idx, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            out.push_str(sep);
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Display for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for HeckeElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            lambda: &'a Partition,
            coeff: &'a QuadScalar,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .rev()
            .map(|(lambda, coeff)| Term { lambda, coeff })
            .collect();
        let mut st = serializer.serialize_struct("HeckeElement", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// `p^{<lambda, rho>}` with `<lambda, rho> = sum_i lambda_i (n + 1 - 2i) / 2`.
pub fn satake_leading_coefficient(lambda: &Partition, p: u64) -> QuadScalar {
    half_power(p, doubled_rho_pairing(lambda.parts()))
}

type TransformCache = Mutex<HashMap<(Partition, u64), LaurentPoly>>;

fn transform_cache() -> &'static TransformCache {
    static CACHE: OnceLock<TransformCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `S(T_lambda) = p^{<lambda, rho>} P_lambda(x; 1/p)`.
pub fn satake_closed_form(lambda: &Partition, p: u64) -> LaurentPoly {
    let key = (lambda.clone(), p);
    if let Some(hit) = transform_cache().lock().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let t = QuadScalar::from_rat(rat_frac(1, p as i64), p);
    // v_lambda(1/p) is a product of positive rationals, never zero
    let hl = hall_littlewood(lambda, &t).expect("t = 1/p is not a root of unity");
    let image = hl.scale(&satake_leading_coefficient(lambda, p));
    transform_cache()
        .lock()
        .expect("cache lock")
        .insert(key, image.clone());
    image
}

/// `S(T_lambda)(m) = delta_0^{-1/2}(m) f_P(m)` assembled from the brute-force
/// constant term, for GL_2 only.
///
/// `truncation` overrides the level of the unipotent integral; the default
/// is one above the guaranteed stability level.
pub fn satake_oracle(lambda: &Partition, p: u64, truncation: Option<u32>) -> Result<LaurentPoly> {
    if lambda.len() != 2 {
        return Err(Error::Bounds(
            "the Satake oracle supports n = 2 only".into(),
        ));
    }
    let level = truncation.unwrap_or(padic::stable_truncation(lambda) + 1);
    let (hi, lo) = (lambda.first(), lambda.last());
    let mut f = LaurentPoly::zero(2, p);
    for a1 in lo..=hi {
        let a = ExpVec(vec![a1, lambda.size() - a1]);
        let ct = padic::constant_term_oracle(lambda, &a, p, level)?;
        // delta_0(diag(p^a)) = p^{-2<a, rho>}, so delta_0^{-1/2} = p^{<a, rho>}
        let twist = half_power(p, doubled_rho_pairing(&a.0));
        f.add_term(a, twist.scale(&ct));
    }
    if !is_invariant(&f) {
        return Err(Error::Internal(format!(
            "oracle Satake image of {lambda} is not invariant: {f}"
        )));
    }
    Ok(f)
}

/// Inverse Satake transform on the invariant ring: peels off the
/// lex-leading (necessarily dominant) exponent using unitriangularity of the
/// Hall-Littlewood basis.
pub fn expand_in_satake_basis(f: &LaurentPoly, p: u64) -> Result<HeckeElement> {
    if f.p() != p {
        return Err(Error::MixedPrime(p, f.p()));
    }
    if !is_invariant(f) {
        return Err(Error::NotInvariant);
    }
    let mut rest = f.clone();
    let mut out = HeckeElement::zero(f.arity(), p);
    while let Some((e, c)) = rest.leading() {
        let lambda = Partition::new(e.0.clone())
            .map_err(|_| Error::Internal(format!("non-dominant leading exponent {e}")))?;
        let coeff = c.try_div(&satake_leading_coefficient(&lambda, p))?;
        rest = &rest - &satake_closed_form(&lambda, p).scale(&coeff);
        out.add_term(lambda, coeff);
    }
    Ok(out)
}

/// Eigenvalue of `T_lambda` on the spherical vector with Satake parameter `chi`.
pub fn spherical_eigenvalue(lambda: &Partition, chi: &[QuadScalar], p: u64) -> Result<QuadScalar> {
    satake_closed_form(lambda, p).eval(chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;
    use crate::weyl::all_permutations;
    use proptest::prelude::*;

    fn part(v: &[i64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn k(n: i64, p: u64) -> QuadScalar {
        QuadScalar::from_int(n, p)
    }

    fn x_sum(p: u64) -> LaurentPoly {
        &LaurentPoly::var(2, 0, p) + &LaurentPoly::var(2, 1, p)
    }

    #[test]
    fn closed_form_examples() {
        for p in [2, 3, 5] {
            assert_eq!(
                satake_closed_form(&part(&[0, 0]), p),
                LaurentPoly::one(2, p)
            );
            assert_eq!(
                satake_closed_form(&part(&[1, 1]), p),
                LaurentPoly::monomial(ExpVec(vec![1, 1]), k(1, p))
            );
            assert_eq!(
                satake_closed_form(&part(&[1, 0]), p),
                x_sum(p).scale(&QuadScalar::sqrt_p(p))
            );
        }
        assert_eq!(
            satake_closed_form(&part(&[1, 0]), 3).render_factored(),
            "s*(x1 + x2)"
        );
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            satake_oracle(&part(&[0, 0]), 2, None).unwrap(),
            LaurentPoly::one(2, 2)
        );
        assert_eq!(
            satake_oracle(&part(&[1, 0]), 2, None).unwrap(),
            x_sum(2).scale(&QuadScalar::sqrt_p(2))
        );
        let expected = LaurentPoly::from_terms(
            2,
            2,
            [
                (vec![2, 0], k(2, 2)),
                (vec![0, 2], k(2, 2)),
                (vec![1, 1], k(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(satake_oracle(&part(&[2, 0]), 2, None).unwrap(), expected);
    }

    #[test]
    fn oracle_matches_closed_form() {
        for p in [2, 3] {
            for lambda in Partition::all_in_box(2, -1, 2) {
                assert_eq!(
                    satake_oracle(&lambda, p, None).unwrap(),
                    satake_closed_form(&lambda, p),
                    "{lambda} p={p}"
                );
            }
        }
    }

    #[test]
    fn leading_coefficient() {
        for n in 2..=4 {
            for lambda in Partition::all_in_box(n, -1, 2) {
                let s = satake_closed_form(&lambda, 3);
                assert!(is_invariant(&s));
                assert_eq!(s.leading().unwrap().0, &lambda.exp());
                assert_eq!(
                    s.leading().unwrap().1,
                    &satake_leading_coefficient(&lambda, 3)
                );
            }
        }
    }

    #[test]
    fn multiplication_examples() {
        for p in [2, 3, 7] {
            let t10 = HeckeElement::basis(&part(&[1, 0]), p);
            let t11 = HeckeElement::basis(&part(&[1, 1]), p);
            let eps = HeckeElement::identity(2, p);
            assert_eq!(eps.multiply(&t10).unwrap(), t10);
            assert_eq!(
                t11.multiply(&t10).unwrap(),
                HeckeElement::basis(&part(&[2, 1]), p)
            );
            let mut expected = HeckeElement::basis(&part(&[2, 0]), p);
            expected.add_term(part(&[1, 1]), k(p as i64 + 1, p));
            assert_eq!(t10.multiply(&t10).unwrap(), expected);
        }
        let t10 = HeckeElement::basis(&part(&[1, 0]), 3);
        assert_eq!(t10.multiply(&t10).unwrap().render(), "T(2,0) + 4*T(1,1)");
    }

    #[test]
    fn multiplication_matches_convolution_oracle() {
        for p in [2, 3] {
            let ls = [part(&[1, 0]), part(&[1, 1]), part(&[2, 0]), part(&[2, 1])];
            for a in &ls {
                for b in &ls {
                    let poly_side = HeckeElement::basis(a, p)
                        .multiply(&HeckeElement::basis(b, p))
                        .unwrap();
                    let oracle = padic::convolve_oracle(a, b, p).unwrap();
                    let mut geometric = HeckeElement::zero(2, p);
                    for (nu, c) in oracle {
                        geometric.add_term(nu, k(c as i64, p));
                    }
                    assert_eq!(poly_side, geometric, "{a} * {b}, p={p}");
                }
            }
        }
    }

    #[test]
    fn expansion() {
        let p = 5;
        assert_eq!(
            expand_in_satake_basis(&LaurentPoly::one(2, p), p).unwrap(),
            HeckeElement::identity(2, p)
        );
        let f = x_sum(p).scale(&QuadScalar::sqrt_p(p));
        assert_eq!(
            expand_in_satake_basis(&f, p).unwrap(),
            HeckeElement::basis(&part(&[1, 0]), p)
        );
        assert_eq!(
            expand_in_satake_basis(&LaurentPoly::var(2, 0, p), p),
            Err(Error::NotInvariant)
        );
        for n in 2..=3 {
            for lambda in Partition::all_in_box(n, -2, 2) {
                let back = expand_in_satake_basis(&satake_closed_form(&lambda, p), p).unwrap();
                assert_eq!(back, HeckeElement::basis(&lambda, p));
            }
        }
    }

    #[test]
    fn eigenvalues() {
        let p = 3;
        let chi = [k(2, p), k(5, p)];
        assert!(spherical_eigenvalue(&part(&[0, 0]), &chi, p)
            .unwrap()
            .is_one());
        assert_eq!(
            spherical_eigenvalue(&part(&[1, 0]), &chi, p).unwrap(),
            QuadScalar::sqrt_p(p).scale(&rat(7))
        );
        let chi3 = [k(2, p), QuadScalar::parse("1+s", p).unwrap(), k(-4, p)];
        for lambda in Partition::all_in_box(3, -1, 2) {
            let base = spherical_eigenvalue(&lambda, &chi3, p).unwrap();
            for w in all_permutations(3) {
                assert_eq!(
                    spherical_eigenvalue(&lambda, &w.permute(&chi3), p).unwrap(),
                    base
                );
            }
        }
    }

    fn arb_element(n: usize) -> impl Strategy<Value = HeckeElement> {
        let term = (prop::collection::vec(-1i64..=2, n), -3i64..=3);
        prop::collection::vec(term, 1..=4).prop_map(move |ts| {
            let mut h = HeckeElement::zero(n, 2);
            for (mut parts, c) in ts {
                parts.sort_unstable_by(|a, b| b.cmp(a));
                h.add_term(Partition::new(parts).unwrap(), k(c, 2));
            }
            h
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn commutative_and_associative(
            (a, b, c) in (2usize..=3).prop_flat_map(|n| (arb_element(n), arb_element(n), arb_element(n)))
        ) {
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(&ab, &b.multiply(&a).unwrap());
            prop_assert_eq!(ab.multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
            prop_assert_eq!(HeckeElement::identity(a.n(), 2).multiply(&a).unwrap(), a.clone());
        }

        #[test]
        fn transform_is_multiplicative(
            (a, b) in (2usize..=4).prop_flat_map(|n| (arb_element(n), arb_element(n)))
        ) {
            prop_assert_eq!(a.multiply(&b).unwrap().satake(), &a.satake() * &b.satake());
        }
    }

    #[test]
    fn rendering_and_json() {
        let p = 2;
        let mut h = HeckeElement::basis(&part(&[2, 0]), p);
        h.add_term(part(&[1, 1]), QuadScalar::parse("-1/2", p).unwrap());
        assert_eq!(h.render(), "T(2,0) - (1/2)*T(1,1)");
        assert_eq!(HeckeElement::zero(2, p).render(), "0");
        let v = serde_json::to_value(HeckeElement::identity(2, p)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"n": 2, "p": 2, "terms": [{"lambda": [0, 0], "coeff": {"a": "1/1", "b": "0/1", "p": 2}}]})
        );
    }
}
