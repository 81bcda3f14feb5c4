//! Seeded verification checks behind the `verify` command. Cases run in
//! parallel; outcomes are collected in case order, so reports depend only on
//! `(n, p, seed)`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hecke::{expand_in_satake_basis, satake_closed_form, satake_oracle, HeckeElement};
use crate::jacquet::{k_invariants_dimension_check, verify_jacquet_match};
use crate::padic::convolve_oracle;
use crate::quotient::{
    annihilator_check, build_quotient, composition_factors, is_regular, orbit, OrbitPoint,
};
use crate::scalars::{rat_frac, QuadScalar};
use crate::symfun::{is_invariant, Partition};
use crate::weyl::factorial;

pub const SUITES: &[&str] = &[
    "satake", "convolve", "hecke", "quotient", "factors", "jacquet", "regular", "all",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub n: usize,
    pub p: u64,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "suite {} (n={}, p={}, seed={})\n",
            self.suite, self.n, self.p, self.seed
        );
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<24} {:>5} cases", c.name, c.cases);
            for f in &c.failures {
                let _ = writeln!(out, "      {f}");
            }
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "verification failed"
            }
        );
        out
    }
}

/// Runs `cases` in parallel and collects the failure messages in order.
fn run_cases<T, F>(name: &str, cases: Vec<T>, check: F) -> CheckOutcome
where
    T: Send + Sync,
    F: Fn(&T) -> Result<Option<String>> + Sync,
{
    let results: Vec<Option<String>> = cases
        .par_iter()
        .map(|c| match check(c) {
            Ok(r) => r,
            Err(e) => Some(format!("error: {e}")),
        })
        .collect();
    let failures: Vec<String> = results.into_iter().flatten().collect();
    CheckOutcome {
        name: name.to_string(),
        cases: cases.len(),
        passed: failures.is_empty(),
        failures: failures.into_iter().take(5).collect(),
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random nonzero scalar `a + b s` with small rational `a`, `b`.
pub fn random_scalar<R: Rng>(rng: &mut R, p: u64) -> QuadScalar {
    loop {
        let a = rat_frac(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        let b = if rng.gen_bool(0.25) {
            rat_frac(rng.gen_range(-2..=2), 1)
        } else {
            rat_frac(0, 1)
        };
        let x = QuadScalar::new(a, b, p).expect("p is prime");
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_regular_chi<R: Rng>(rng: &mut R, n: usize, p: u64) -> OrbitPoint {
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        seen.insert(random_scalar(rng, p));
    }
    let mut coords: Vec<QuadScalar> = seen.into_iter().collect();
    coords.shuffle(rng);
    OrbitPoint::new(coords).expect("nonzero coordinates")
}

/// A character with at least one repeated coordinate.
pub fn random_singular_chi<R: Rng>(rng: &mut R, n: usize, p: u64) -> OrbitPoint {
    let mut coords: Vec<QuadScalar> = (0..n).map(|_| random_scalar(rng, p)).collect();
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    coords[j] = coords[i].clone();
    OrbitPoint::new(coords).expect("nonzero coordinates")
}

/// Coordinates drawn independently from a small grid, so collisions occur.
pub fn random_grid_chi<R: Rng>(rng: &mut R, n: usize, p: u64) -> OrbitPoint {
    const GRID: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
    let coords = (0..n)
        .map(|_| QuadScalar::from_int(*GRID.choose(rng).expect("nonempty"), p))
        .collect();
    OrbitPoint::new(coords).expect("nonzero coordinates")
}

fn random_hecke<R: Rng>(rng: &mut R, n: usize, p: u64) -> HeckeElement {
    let mut h = HeckeElement::zero(n, p);
    for _ in 0..rng.gen_range(1..=4) {
        let mut parts: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=2)).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let c = QuadScalar::from_int(rng.gen_range(-3..=3), p);
        h.add_term(Partition::new(parts).expect("sorted"), c);
    }
    h
}

fn part(v: &[i64]) -> Partition {
    Partition::new(v.to_vec()).expect("dominant literal")
}

/// The cocharacters used by the oracle cross-checks.
pub fn oracle_range(n: usize) -> Vec<Partition> {
    match n {
        2 => vec![part(&[1, 0]), part(&[1, 1]), part(&[2, 0]), part(&[2, 1])],
        3 => vec![
            part(&[1, 0, 0]),
            part(&[1, 1, 0]),
            part(&[1, 1, 1]),
            part(&[0, 0, -1]),
        ],
        _ => Vec::new(),
    }
}

pub fn check_satake_oracle(p: u64) -> CheckOutcome {
    run_cases("satake_oracle", oracle_range(2), |l| {
        let oracle = satake_oracle(l, p, None)?;
        let closed = satake_closed_form(l, p);
        Ok((oracle != closed).then(|| format!("{l}: oracle {oracle} vs closed form {closed}")))
    })
}

pub fn check_satake_image(n: usize, p: u64) -> CheckOutcome {
    run_cases("satake_image", Partition::all_in_box(n, -1, 2), |l| {
        let f = satake_closed_form(l, p);
        let ok = is_invariant(&f) && f.leading().map(|(e, _)| e.clone()) == Some(l.exp());
        Ok((!ok).then(|| format!("{l}: image {f}")))
    })
}

pub fn check_convolution(n: usize, p: u64) -> CheckOutcome {
    let range = oracle_range(n);
    let pairs: Vec<(Partition, Partition)> = range
        .iter()
        .flat_map(|a| range.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    run_cases("convolution_oracle", pairs, |(a, b)| {
        let poly = HeckeElement::basis(a, p).multiply(&HeckeElement::basis(b, p))?;
        let mut geometric = HeckeElement::zero(n, p);
        for (nu, c) in convolve_oracle(a, b, p)? {
            geometric.add_term(nu, QuadScalar::from_int(c as i64, p));
        }
        Ok((poly != geometric).then(|| format!("{a} * {b}: {poly} vs {geometric}")))
    })
}

pub fn check_hecke_algebra(
    n: usize,
    p: u64,
    seed: u64,
    triples: usize,
    roundtrips: usize,
) -> CheckOutcome {
    let mut rng = rng_for(seed, 3);
    let cases: Vec<(HeckeElement, HeckeElement, HeckeElement)> = (0..triples)
        .map(|_| {
            (
                random_hecke(&mut rng, n, p),
                random_hecke(&mut rng, n, p),
                random_hecke(&mut rng, n, p),
            )
        })
        .collect();
    let singles: Vec<HeckeElement> = (0..roundtrips)
        .map(|_| random_hecke(&mut rng, n, p))
        .collect();
    let mut out = run_cases("hecke_algebra", cases, |(a, b, c)| {
        let eps = HeckeElement::identity(n, p);
        let ab = a.multiply(b)?;
        if ab != b.multiply(a)? {
            return Ok(Some(format!("not commutative: {a} ; {b}")));
        }
        if ab.multiply(c)? != a.multiply(&b.multiply(c)?)? {
            return Ok(Some(format!("not associative: {a} ; {b} ; {c}")));
        }
        if eps.multiply(a)? != *a || a.multiply(&eps)? != *a {
            return Ok(Some(format!("identity fails on {a}")));
        }
        Ok(None)
    });
    let back = run_cases("satake_roundtrip", singles, |h| {
        let f = h.satake();
        let g = expand_in_satake_basis(&f, p)?;
        Ok((g != *h).then(|| format!("{h} came back as {g}")))
    });
    out.cases += back.cases;
    out.failures.extend(back.failures);
    out.passed &= back.passed;
    out
}

pub fn check_quotient_dimension(n: usize, p: u64, seed: u64, count: usize) -> CheckOutcome {
    let mut rng = rng_for(seed, 4);
    let cases: Vec<OrbitPoint> = (0..count)
        .map(|i| {
            if i % 3 == 2 {
                random_singular_chi(&mut rng, n, p)
            } else {
                random_regular_chi(&mut rng, n, p)
            }
        })
        .collect();
    run_cases("quotient_dimension", cases, move |chi| {
        let q = build_quotient(chi, p)?;
        if q.dim != factorial(n) {
            return Ok(Some(format!("{chi}: dim {}", q.dim)));
        }
        if !q.ops_commute() || !q.ops_invertible() {
            return Ok(Some(format!(
                "{chi}: operators do not commute or are singular"
            )));
        }
        if !annihilator_check(&q, chi)? {
            return Ok(Some(format!("{chi}: annihilator check failed")));
        }
        Ok(None)
    })
}

pub fn check_composition_factors(
    n: usize,
    p: u64,
    seed: u64,
    regular: usize,
    singular: usize,
) -> CheckOutcome {
    let mut rng = rng_for(seed, 5);
    let mut cases: Vec<OrbitPoint> = (0..regular)
        .map(|_| random_regular_chi(&mut rng, n, p))
        .collect();
    cases.extend((0..singular).map(|_| random_singular_chi(&mut rng, n, p)));
    run_cases("composition_factors", cases, move |chi| {
        let o = orbit(chi);
        let factors = composition_factors(&build_quotient(chi, p)?, &o)?;
        if factors.values().sum::<usize>() != factorial(n) || !factors.keys().all(|x| o.contains(x))
        {
            return Ok(Some(format!("{chi}: factors {factors:?}")));
        }
        if is_regular(&o) && (factors.len() != o.size() || factors.values().any(|&m| m != 1)) {
            return Ok(Some(format!(
                "{chi}: regular orbit with multiplicities {factors:?}"
            )));
        }
        Ok(None)
    })
}

pub fn check_jacquet(n: usize, p: u64, seed: u64, count: usize) -> CheckOutcome {
    let mut rng = rng_for(seed, 6);
    let cases: Vec<OrbitPoint> = (0..count)
        .map(|_| random_regular_chi(&mut rng, n, p))
        .collect();
    run_cases("jacquet_match", cases, move |chi| {
        let report = verify_jacquet_match(chi, p)?;
        if !report.matches {
            return Ok(Some(format!(
                "{chi}: {}",
                serde_json::to_string(&report).unwrap_or_default()
            )));
        }
        if !k_invariants_dimension_check(chi, p)? {
            return Ok(Some(format!(
                "{chi}: eigenvalue character is not multiplicative"
            )));
        }
        Ok(None)
    })
}

pub fn check_regular_locus(n: usize, p: u64, seed: u64, count: usize) -> CheckOutcome {
    let mut rng = rng_for(seed, 7);
    let cases: Vec<OrbitPoint> = (0..count)
        .map(|_| random_grid_chi(&mut rng, n, p))
        .collect();
    run_cases("regular_locus", cases, |chi| {
        let regular = is_regular(&orbit(chi));
        Ok((regular != chi.has_distinct_coords()).then(|| format!("{chi}: regular = {regular}")))
    })
}

/// Runs a named suite for one `(n, p)`.
pub fn run_suite(name: &str, n: usize, p: u64, seed: u64) -> Result<SuiteReport> {
    if !SUITES.contains(&name) {
        return Err(Error::Parse(format!(
            "unknown suite {name:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    if !(2..=4).contains(&n) {
        return Err(Error::Bounds(format!(
            "verify supports n in 2..=4, got {n}"
        )));
    }
    let want = |s: &str| name == "all" || name == s;
    // the 24-dimensional quotients make n = 4 an order of magnitude slower
    let scale = |k: usize| if n == 4 { k.div_ceil(4) } else { k };
    let mut checks = Vec::new();
    if want("satake") {
        if n == 2 {
            checks.push(check_satake_oracle(p));
        }
        checks.push(check_satake_image(n, p));
    }
    if want("convolve") && n <= 3 {
        checks.push(check_convolution(n, p));
    }
    if want("hecke") {
        checks.push(check_hecke_algebra(n, p, seed, scale(100), scale(50)));
    }
    if want("quotient") {
        checks.push(check_quotient_dimension(n, p, seed, 10));
    }
    if want("factors") {
        checks.push(check_composition_factors(n, p, seed, scale(20), scale(5)));
    }
    if want("jacquet") {
        checks.push(check_jacquet(n, p, seed, scale(20)));
    }
    if want("regular") {
        checks.push(check_regular_locus(n, p, seed, 1000));
    }
    Ok(SuiteReport {
        schema: 1,
        suite: name.to_string(),
        n,
        p,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
