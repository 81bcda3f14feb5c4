//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spherical_hecke::cli;
use spherical_hecke::hecke::{
    expand_in_satake_basis, satake_closed_form, satake_oracle, HeckeElement,
};
use spherical_hecke::jacquet::{
    jacquet_of_principal_series, jacquet_of_w_module, verify_jacquet_match, Normalization,
};
use spherical_hecke::padic::{convolve_oracle, coset_degree};
use spherical_hecke::quotient::{
    annihilator_check, build_quotient, composition_factors, is_regular, orbit, OrbitPoint,
};
use spherical_hecke::suite::{random_grid_chi, random_regular_chi, random_singular_chi};
use spherical_hecke::{LaurentPoly, Partition, QuadScalar};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn part(v: &[i64]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

fn gl2_range() -> Vec<Partition> {
    vec![part(&[1, 0]), part(&[1, 1]), part(&[2, 0]), part(&[2, 1])]
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn satake_cross_validation() -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3] {
        for lambda in gl2_range() {
            let oracle =
                satake_oracle(&lambda, p, None).map_err(|e| format!("{lambda}, p={p}: {e}"))?;
            let closed = satake_closed_form(&lambda, p);
            ensure(oracle == closed, || {
                format!("{lambda}, p={p}: oracle {oracle} vs {closed}")
            })?;
            cases += 1;
        }
    }
    let q = |x| QuadScalar::from_int(x, 2);
    let expected = LaurentPoly::from_terms(
        2,
        2,
        [(vec![2, 0], q(2)), (vec![1, 1], q(1)), (vec![0, 2], q(2))],
    )
    .unwrap();
    ensure(satake_closed_form(&part(&[2, 0]), 2) == expected, || {
        "S(T(2,0)) at p=2".into()
    })?;
    Ok(format!("{cases} transforms agree exactly"))
}

fn convolution_cross_validation() -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3] {
        for a in gl2_range() {
            for b in gl2_range() {
                let counts =
                    convolve_oracle(&a, &b, p).map_err(|e| format!("{a} * {b}, p={p}: {e}"))?;
                // the oracle refuses to return without the mass identity; recheck it here
                let lhs = coset_degree(&a, p).unwrap() * coset_degree(&b, p).unwrap();
                let rhs: u64 = counts
                    .iter()
                    .map(|(nu, c)| c * coset_degree(nu, p).unwrap())
                    .sum();
                ensure(lhs == rhs, || {
                    format!("mass identity {a} * {b}, p={p}: {lhs} vs {rhs}")
                })?;
                let mut geometric = HeckeElement::zero(2, p);
                for (nu, c) in counts {
                    geometric.add_term(nu, QuadScalar::from_int(c as i64, p));
                }
                let poly = HeckeElement::basis(&a, p)
                    .multiply(&HeckeElement::basis(&b, p))
                    .unwrap();
                ensure(poly == geometric, || {
                    format!("{a} * {b}, p={p}: {poly} vs {geometric}")
                })?;
                cases += 1;
            }
        }
        let t10 = HeckeElement::basis(&part(&[1, 0]), p);
        let mut expected = HeckeElement::basis(&part(&[2, 0]), p);
        expected.add_term(part(&[1, 1]), QuadScalar::from_int(p as i64 + 1, p));
        ensure(t10.multiply(&t10).unwrap() == expected, || {
            format!("T(1,0)^2 at p={p}")
        })?;
    }
    Ok(format!("{cases} products agree, mass identity holds"))
}

fn fixed_characters(n: usize) -> Vec<Vec<i64>> {
    match n {
        2 => vec![vec![2, 3], vec![4, 4], vec![1, -1], vec![-1, -1]],
        3 => vec![vec![1, 2, 3], vec![1, 1, 2], vec![5, 5, 5], vec![-1, 1, 2]],
        _ => vec![
            vec![1, 2, 3, 4],
            vec![1, 1, 2, 2],
            vec![3, 3, 3, 3],
            vec![1, 1, 1, 2],
        ],
    }
}

fn quotient_dimension() -> Outcome {
    let mut summary = Vec::new();
    for n in 2..=4 {
        let p = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(30 + n as u64);
        let mut chis: Vec<OrbitPoint> = fixed_characters(n)
            .iter()
            .map(|xs| OrbitPoint::from_ints(xs, p).unwrap())
            .collect();
        chis.extend((0..4).map(|_| random_regular_chi(&mut rng, n, p)));
        chis.extend((0..3).map(|_| random_singular_chi(&mut rng, n, p)));
        let singular = chis.iter().filter(|c| !is_regular(&orbit(c))).count();
        let results: Vec<Result<(), String>> = chis
            .par_iter()
            .map(|chi| {
                let q = build_quotient(chi, p).map_err(|e| format!("{chi}: {e}"))?;
                ensure(q.dim == factorial(n), || format!("{chi}: dim {}", q.dim))?;
                ensure(q.ops_commute() && q.ops_invertible(), || {
                    format!("{chi}: operators")
                })?;
                ensure(annihilator_check(&q, chi).unwrap(), || {
                    format!("{chi}: annihilator")
                })
            })
            .collect();
        results.into_iter().collect::<Result<Vec<_>, _>>()?;
        summary.push(format!(
            "n={n}: {} chi ({singular} non-regular)",
            chis.len()
        ));
    }
    Ok(summary.join(", "))
}

fn composition_factor_check() -> Outcome {
    let mut summary = Vec::new();
    for n in 2..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + n as u64);
        let mut cases: Vec<(OrbitPoint, u64)> = Vec::new();
        for i in 0..24 {
            let p = if i % 2 == 0 { 2 } else { 3 };
            cases.push((random_regular_chi(&mut rng, n, p), p));
        }
        for i in 0..6 {
            let p = if i % 2 == 0 { 2 } else { 3 };
            cases.push((random_singular_chi(&mut rng, n, p), p));
        }
        let results: Vec<Result<bool, String>> = cases
            .par_iter()
            .map(|(chi, p)| {
                let o = orbit(chi);
                let q = build_quotient(chi, *p).map_err(|e| format!("{chi}: {e}"))?;
                let f = composition_factors(&q, &o).map_err(|e| format!("{chi}: {e}"))?;
                ensure(f.values().sum::<usize>() == factorial(n), || {
                    format!("{chi}: sum {f:?}")
                })?;
                ensure(f.keys().all(|x| o.contains(x)), || {
                    format!("{chi}: support {f:?}")
                })?;
                if is_regular(&o) {
                    ensure(f.len() == o.size() && f.values().all(|&m| m == 1), || {
                        format!("{chi}: {f:?}")
                    })?;
                }
                Ok(is_regular(&o))
            })
            .collect();
        let regular = results
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .filter(|r| **r)
            .count();
        ensure(regular >= 20, || {
            format!("only {regular} regular characters for n={n}")
        })?;
        summary.push(format!(
            "n={n}: {regular} regular all multiplicity 1, {} non-regular",
            cases.len() - regular
        ));
    }
    Ok(summary.join(", "))
}

fn jacquet_check() -> Outcome {
    let mut summary = Vec::new();
    for n in 2..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(50 + n as u64);
        let cases: Vec<(OrbitPoint, u64)> = (0..24)
            .map(|i| {
                let p = [2, 3, 5][i % 3];
                (random_regular_chi(&mut rng, n, p), p)
            })
            .collect();
        let results: Vec<Result<(), String>> = cases
            .par_iter()
            .map(|(chi, p)| {
                let report = verify_jacquet_match(chi, *p).map_err(|e| format!("{chi}: {e}"))?;
                ensure(report.matches, || format!("{chi}: multisets differ"))?;
                // the same comparison rebuilt from the two raw multisets
                let w = jacquet_of_w_module(chi, *p, Normalization::Twisted).unwrap();
                let ps = jacquet_of_principal_series(chi);
                ensure(w == ps && w.values().sum::<usize>() == factorial(n), || {
                    format!("{chi}: {w:?} vs {ps:?}")
                })
            })
            .collect();
        results.into_iter().collect::<Result<Vec<_>, _>>()?;
        summary.push(format!("n={n}: {} regular chi", cases.len()));
    }
    Ok(summary.join(", "))
}

fn random_hecke(rng: &mut ChaCha8Rng, n: usize, p: u64) -> HeckeElement {
    use rand::Rng;
    let mut h = HeckeElement::zero(n, p);
    for _ in 0..rng.gen_range(1..=4) {
        let mut parts: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=2)).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        h.add_term(
            Partition::new(parts).unwrap(),
            QuadScalar::from_int(rng.gen_range(-3..=3), p),
        );
    }
    h
}

fn hecke_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let triples: Vec<(usize, u64, [HeckeElement; 3])> = (0..100)
        .map(|i| {
            let n = 2 + i % 2;
            let p = [2, 3][(i / 2) % 2];
            let t = [
                random_hecke(&mut rng, n, p),
                random_hecke(&mut rng, n, p),
                random_hecke(&mut rng, n, p),
            ];
            (n, p, t)
        })
        .collect();
    let results: Vec<Result<(), String>> = triples
        .par_iter()
        .map(|(n, p, [a, b, c])| {
            let eps = HeckeElement::identity(*n, *p);
            let ab = a.multiply(b).unwrap();
            ensure(ab == b.multiply(a).unwrap(), || {
                format!("commutativity: {a}; {b}")
            })?;
            ensure(
                ab.multiply(c).unwrap() == a.multiply(&b.multiply(c).unwrap()).unwrap(),
                || format!("associativity: {a}; {b}; {c}"),
            )?;
            ensure(
                eps.multiply(a).unwrap() == *a && a.multiply(&eps).unwrap() == *a,
                || format!("identity: {a}"),
            )
        })
        .collect();
    results.into_iter().collect::<Result<Vec<_>, _>>()?;
    for i in 0..50 {
        let n = 2 + i % 2;
        let h = random_hecke(&mut rng, n, 3);
        let back = expand_in_satake_basis(&h.satake(), 3).map_err(|e| e.to_string())?;
        ensure(back == h, || format!("round trip: {h} -> {back}"))?;
    }
    Ok("100 triples, 50 round trips".into())
}

fn regular_locus() -> Outcome {
    let mut summary = Vec::new();
    for n in 2..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + n as u64);
        let mut regular = 0;
        for _ in 0..1000 {
            let chi = random_grid_chi(&mut rng, n, 2);
            let r = is_regular(&orbit(&chi));
            ensure(r == chi.has_distinct_coords(), || {
                format!("{chi}: regular = {r}")
            })?;
            regular += r as usize;
        }
        summary.push(format!("n={n}: {regular}/1000 regular"));
    }
    Ok(summary.join(", "))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["hecke"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, out, err)
}

fn determinism() -> Outcome {
    let args = ["verify", "all", "--n", "2", "--p", "2", "--seed", "7"];
    let (c1, first, _) = run_cli(&args);
    let (c2, second, _) = run_cli(&args);
    ensure(c1 == 0 && c2 == 0, || {
        format!("verify all exited {c1}, {c2}")
    })?;
    ensure(first == second, || "verify all reports differ".into())?;
    let json_args = [
        "verify", "all", "--n", "3", "--p", "3", "--seed", "7", "--format", "json",
    ];
    ensure(run_cli(&json_args).1 == run_cli(&json_args).1, || {
        "JSON reports differ".into()
    })?;
    let binary = Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        binary.status.code() == Some(0) && binary.stdout == first,
        || "binary report differs".into(),
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = dir.path().join("cache.json");
    let cache_arg = cache.to_str().unwrap();
    let mut replay = BTreeMap::new();
    for (lambda, mu) in [("1,0", "1,0"), ("2,0", "1,1"), ("2,1", "1,0")] {
        let conv = [
            "convolve", "--n", "2", "--p", "3", "--lambda", lambda, "--mu", mu, "--oracle",
            "--cache", cache_arg,
        ];
        let (c1, out1, err1) = run_cli(&conv);
        let stored = fs::read(&cache).map_err(|e| e.to_string())?;
        let (c2, out2, err2) = run_cli(&conv);
        ensure(c1 == 0 && c2 == 0, || {
            format!("convolve {lambda} {mu} exited {c1}, {c2}")
        })?;
        ensure(err1 == b"cache: miss\n" && err2 == b"cache: hit\n", || {
            "cache status lines".into()
        })?;
        ensure(out1 == out2, || {
            format!("replay of {lambda} * {mu} differs")
        })?;
        ensure(fs::read(&cache).unwrap() == stored, || {
            "cache rewritten on a hit".into()
        })?;
        replay.insert(lambda, out1);
    }
    ensure(
        String::from_utf8_lossy(&replay["1,0"]).starts_with("T(2,0) + 4*T(1,1)\n"),
        || "T(1,0)^2 at p=3".into(),
    )?;
    Ok("verify reports and cache replays byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "Satake transform: oracle = closed form",
            satake_cross_validation,
        ),
        (
            "convolution: oracle = polynomial side",
            convolution_cross_validation,
        ),
        ("quotient dimension n! for n = 2, 3, 4", quotient_dimension),
        ("composition factors of A/mA", composition_factor_check),
        ("Jacquet multiset = principal series", jacquet_check),
        ("commutative Hecke algebra sanity", hecke_sanity),
        ("regular locus = distinct coordinates", regular_locus),
        ("determinism and cache replay", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{detail}] ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
