use std::fs;

use serde_json::Value;
use spherical_hecke::cli::{run, CACHE_VERSION};

fn hecke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("hecke").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = hecke(&full);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn satake_command() {
    assert_eq!(
        hecke(&["satake", "--n", "2", "--p", "3", "--lambda", "1,0"]).1,
        "s*(x1 + x2)\n"
    );
    assert_eq!(
        hecke(&["satake", "--n", "2", "--p", "2", "--lambda", "0,0"]).1,
        "1\n"
    );
    let (code, out, _) = hecke(&[
        "satake", "--n", "2", "--p", "2", "--lambda", "1,0", "--oracle",
    ]);
    assert_eq!(code, 0);
    assert!(out.ends_with("verdict: EQUAL\n"));
    let v = json(&["satake", "--p", "2", "--lambda", "2,0", "--oracle"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdict"], "EQUAL");
    assert_eq!(v["rendered"], "2*x1^2 + x1*x2 + 2*x2^2");
    // global flags may precede the subcommand
    assert_eq!(
        hecke(&["--p", "3", "satake", "--lambda", "1,0"]).1,
        "s*(x1 + x2)\n"
    );
    assert_eq!(hecke(&["satake", "--lambda", "-1,-1"]).1, "x1^-1*x2^-1\n");
}

#[test]
fn satake_truncation_too_low_fails_verification() {
    let (code, _, err) = hecke(&["satake", "--lambda", "2,0", "--oracle", "--truncation", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("not stable"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["satake", "--lambda", "0,1"][..],
        &["satake", "--lambda", "1,0,0"],
        &["satake", "--p", "4", "--lambda", "1,0"],
        &["satake", "--n", "3", "--lambda", "1,0,0", "--oracle"],
        &["orbit", "--chi", "0,1"],
        &["orbit", "--chi", "2,x"],
        &[
            "convolve", "--n", "4", "--lambda", "1,0,0,0", "--mu", "1,0,0,0", "--oracle",
        ],
        &["verify", "nonsense"],
        &["frobnicate"],
        &["satake"],
    ] {
        let (code, _, err) = hecke(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = hecke(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("a/b+c/d*s"));
}

#[test]
fn orbit_and_quotient_commands() {
    let (code, out, _) = hecke(&["orbit", "--chi", "2,3", "--n", "2", "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "{\"schema\":1,\"points\":[[2,3],[3,2]],\"regular\":true}\n"
    );
    let v = json(&["orbit", "--chi", "s,s", "--p", "5"]);
    assert_eq!(v["points"], serde_json::json!([["s", "s"]]));
    assert_eq!(v["regular"], false);

    let v = json(&["quotient", "--chi", "2,3", "--p", "5"]);
    assert_eq!(v["module"]["dim"], 2);
    assert_eq!(v["annihilator"], true);
    assert_eq!(v["factors"].as_array().unwrap().len(), 2);
    let v = json(&["quotient", "--n", "3", "--chi", "1,1,2", "--p", "3"]);
    assert_eq!(v["module"]["dim"], 6);
    let mults: Vec<u64> = v["factors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["multiplicity"].as_u64().unwrap())
        .collect();
    assert_eq!(mults, vec![2, 2, 2]);
}

#[test]
fn jacquet_command() {
    let (code, out, _) = hecke(&["jacquet", "--chi", "2,3", "--n", "2", "--p", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("W-module factors: [2,3] x1, [3,2] x1"));
    assert!(out.contains("match: true"));
    let v = json(&["jacquet", "--chi", "4,4", "--p", "5"]);
    assert_eq!(v["regular"], false);
    assert_eq!(v["w_module_factors"][0]["multiplicity"], 2);
}

#[test]
fn convolve_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let c = cache.to_str().unwrap();
    let args = [
        "convolve", "--lambda", "1,0", "--mu", "1,0", "--n", "2", "--p", "3", "--oracle",
        "--cache", c,
    ];
    let (code, first, err) = hecke(&args);
    assert_eq!((code, err.as_str()), (0, "cache: miss\n"));
    assert_eq!(
        first,
        "T(2,0) + 4*T(1,1)\noracle: T(2,0) + 4*T(1,1)\nverdict: EQUAL\n"
    );
    let (code, second, err) = hecke(&args);
    assert_eq!((code, err.as_str()), (0, "cache: hit\n"));
    assert_eq!(first, second);
    let stored: Value = serde_json::from_str(&fs::read_to_string(&cache).unwrap()).unwrap();
    assert_eq!(stored["entries"][0]["result"]["1,1"], 4);
    assert_eq!(stored["schema"], 1);

    // entries are appended, never rewritten
    hecke(&[
        "convolve", "--lambda", "1,1", "--mu", "1,1", "--p", "3", "--oracle", "--cache", c,
    ]);
    let stored: Value = serde_json::from_str(&fs::read_to_string(&cache).unwrap()).unwrap();
    assert_eq!(stored["entries"].as_array().unwrap().len(), 2);
    assert_eq!(stored["entries"][1]["result"]["2,2"], 1);

    assert_eq!(
        hecke(&["convolve", "--lambda", "1,1", "--mu", "1,1"]).1,
        "T(2,2)\n"
    );
}

#[test]
fn cache_refusals_and_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let c = cache.to_str().unwrap();
    let args = [
        "convolve", "--lambda", "1,0", "--mu", "1,1", "--p", "2", "--oracle", "--cache", c,
    ];

    fs::write(&cache, "{ not json").unwrap();
    let (code, _, err) = hecke(&args);
    assert_eq!(code, 2);
    assert!(err.contains("corrupt"), "{err}");
    assert_eq!(fs::read_to_string(&cache).unwrap(), "{ not json");

    let other_prime =
        format!(r#"{{"schema":1,"version":"{CACHE_VERSION}","p":3,"n":2,"entries":[]}}"#);
    fs::write(&cache, &other_prime).unwrap();
    assert_eq!(hecke(&args).0, 2);
    assert_eq!(fs::read_to_string(&cache).unwrap(), other_prime);

    let bad_key = format!(
        r#"{{"schema":1,"version":"{CACHE_VERSION}","p":2,"n":2,"entries":[{{"lambda":[1,0],"mu":[1,1],"result":{{"x":1}}}}]}}"#
    );
    fs::write(&cache, bad_key).unwrap();
    assert_eq!(hecke(&args).0, 2);

    // a stale (but well-formed) cache with wrong counts is discarded, not trusted
    fs::write(
        &cache,
        r#"{"schema":1,"version":"0.0.0","p":2,"n":2,"entries":[{"lambda":[1,0],"mu":[1,1],"result":{"2,1":7}}]}"#,
    )
    .unwrap();
    let (code, out, err) = hecke(&args);
    assert_eq!(code, 0);
    assert!(err.contains("version mismatch"));
    assert!(out.ends_with("verdict: EQUAL\n"));
    let stored: Value = serde_json::from_str(&fs::read_to_string(&cache).unwrap()).unwrap();
    assert_eq!(stored["version"], CACHE_VERSION);
    assert_eq!(stored["entries"][0]["result"]["2,1"], 1);

    // a current-version cache holding wrong counts is reported as DIFFER
    let wrong = format!(
        r#"{{"schema":1,"version":"{CACHE_VERSION}","p":2,"n":2,"entries":[{{"lambda":[1,0],"mu":[1,1],"result":{{"2,1":7}}}}]}}"#
    );
    fs::write(&cache, wrong).unwrap();
    let (code, out, _) = hecke(&args);
    assert_eq!(code, 1);
    assert!(out.ends_with("verdict: DIFFER\n"));
}

#[test]
fn verify_command() {
    let (code, out, _) = hecke(&["verify", "all", "--n", "2", "--p", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("all checks passed\n"));
    assert_eq!(
        out,
        hecke(&["verify", "all", "--n", "2", "--p", "2", "--seed", "7"]).1
    );
    let v = json(&["verify", "jacquet", "--n", "3", "--p", "3", "--seed", "1"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"][0]["name"], "jacquet_match");
    assert_eq!(v["checks"][0]["cases"], 20);
}
